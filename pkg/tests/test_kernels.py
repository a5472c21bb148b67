"""Backend kernels against independent oracles, plus cross-backend parity."""

import numpy as np
import pytest

from sparsalloc._kernels import _py
from sparsalloc.rng import SplitMix64

try:
    from sparsalloc._kernels import _core

    BACKENDS = [("python", _py), ("compiled", _core)]
except ImportError:  # extension not built
    _core = None
    BACKENDS = [("python", _py)]


def _buf(seed, n, lo=-1.0, hi=1.0):
    return SplitMix64(seed).fill_uniform(n, lo, hi)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_matmul_matches_numpy(name, impl):
    a = _buf(1, 5 * 4)
    b = _buf(2, 4 * 3)
    out = impl.matmul(a, 5, 4, b, 3)
    expected = np.array(a).reshape(5, 4) @ np.array(b).reshape(4, 3)
    assert np.max(np.abs(np.array(out).reshape(5, 3) - expected)) < 1e-12


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_frob_and_diff(name, impl):
    a = _buf(3, 36)
    b = _buf(4, 36)
    assert impl.frob_norm_sq(a) == pytest.approx(float(np.sum(np.array(a) ** 2)), rel=1e-12)
    assert impl.frob_diff_sq(a, b) == pytest.approx(
        float(np.sum((np.array(a) - np.array(b)) ** 2)), rel=1e-12
    )


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_row_sq_norms(name, impl):
    x = _buf(5, 6 * 9)
    out = impl.row_sq_norms(x, 6, 9)
    expected = np.sum(np.array(x).reshape(6, 9) ** 2, axis=1)
    assert np.allclose(out, expected, rtol=1e-12)


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_elementwise_and_abs_and_relu(name, impl):
    a = _buf(6, 20)
    b = _buf(7, 20)
    assert np.allclose(impl.elementwise_mul(a, b), np.array(a) * np.array(b))
    assert np.allclose(impl.abs_values(a), np.abs(a))
    assert np.allclose(impl.relu(a), np.maximum(np.array(a), 0.0))


@pytest.mark.parametrize("name,impl", BACKENDS)
def test_wanda_scores(name, impl):
    w = _buf(8, 4 * 3)
    norms = _buf(9, 3, 0.1, 2.0)
    out = impl.wanda_scores(w, 4, 3, norms)
    expected = np.abs(np.array(w).reshape(4, 3)) * np.array(norms)[None, :]
    assert np.allclose(np.array(out).reshape(4, 3), expected, rtol=1e-12)


@pytest.mark.parametrize("name,impl", BACKENDS)
@pytest.mark.parametrize("n", [1, 2, 5, 16, 33])
def test_sym_eigvals_against_numpy(name, impl, n):
    from array import array

    m = _buf(10 + n, n * n)
    sym = np.array(m).reshape(n, n)
    sym = sym + sym.T
    got = impl.sym_eigvals(array("d", sym.reshape(-1)), n)
    expected = np.linalg.eigvalsh(sym)
    assert np.max(np.abs(np.array(got) - expected)) < 1e-10 * max(1.0, np.max(np.abs(expected)))


@pytest.mark.skipif(_core is None, reason="compiled backend unavailable")
def test_backends_agree_bitwise():
    from array import array

    a = _buf(20, 12 * 7)
    b = _buf(21, 7 * 9)
    assert _py.matmul(a, 12, 7, b, 9).tobytes() == _core.matmul(a, 12, 7, b, 9).tobytes()
    assert _py.frob_norm_sq(a) == _core.frob_norm_sq(a)
    sym = np.array(_buf(22, 10 * 10)).reshape(10, 10)
    sym = sym + sym.T
    flat = array("d", sym.reshape(-1))
    assert _py.sym_eigvals(flat, 10).tobytes() == _core.sym_eigvals(flat, 10).tobytes()
