import math

import pytest

from sparsalloc.linalg import DenseMatrix
from sparsalloc.rng import SplitMix64


def random_matrix(seed: int, rows: int, cols: int, lo: float = -1.0, hi: float = 1.0) -> DenseMatrix:
    rng = SplitMix64(seed)
    return DenseMatrix(rows, cols, rng.fill_uniform(rows * cols, lo, hi))


def random_normal_matrix(seed: int, rows: int, cols: int) -> DenseMatrix:
    rng = SplitMix64(seed)
    return DenseMatrix(rows, cols, rng.fill_normal(rows * cols))


def householder(seed: int, n: int) -> DenseMatrix:
    """Random orthogonal reflector I - 2 v v^T / (v^T v)."""
    rng = SplitMix64(seed)
    v = [rng.uniform(-1.0, 1.0) for _ in range(n)]
    vv = math.fsum(x * x for x in v)
    h = DenseMatrix.identity(n)
    for i in range(n):
        for j in range(n):
            h.data[i * n + j] -= 2.0 * v[i] * v[j] / vv
    return h


def assert_close(a: float, b: float, rel: float = 1e-12, abs_tol: float = 0.0):
    assert abs(a - b) <= abs_tol + rel * max(abs(a), abs(b)), f"{a} != {b}"


@pytest.fixture
def small_net():
    from sparsalloc.netmodel import Activation, generate_net

    return generate_net(4, [8, 8, 8, 8, 8], Activation.LINEAR, seed=11)
