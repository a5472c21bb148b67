"""Per-layer and total reconstruction error on masked networks.

The layer error is the squared Frobenius distance between the dense and
sparse pre-activation products,

    err_i = || W_i X_i - W~_i X~_i ||_F^2,

with both input chains propagated from the same calibration batch
(X_1 = X~_1). Errors are measured pre-activation even in ReLU mode because
the propagation theory is stated on products.

Two empirical validators accompany the measurement:

* :func:`check_theorem1` sweeps one layer's sparsity with a fixed dense
  input and reports how often the error grows with the rate. For nested
  masks (fixed scores, e.g. magnitude) the growth is exact in practice;
  in general the single-layer claim rests on a positive-inner-product
  heuristic, so the result is a reported fraction, not a theorem.
* :func:`check_theorem2_bound` tests the propagation lower bound
  err_{i+1} > sigma_min^2(W~_{i+1}) * err_i. Its derivation drops a cross
  term, so satisfaction is reported as a fraction and asserted only
  statistically by callers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from sparsalloc import __version__ as _pkg_version
from sparsalloc import _kernels
from sparsalloc._csvio import write_csv
from sparsalloc.errors import ShapeError
from sparsalloc.linalg import DenseMatrix, matmul, sigma_min
from sparsalloc.netmodel import CalibrationSet, LayerNet, forward_preacts
from sparsalloc.pruner import PruneMethod, prune_layer, score_layer


@dataclass(frozen=True)
class ErrorTrace:
    per_layer: tuple[float, ...]
    total: float
    profile: object = None
    method: PruneMethod | None = None


def layer_error(
    w: DenseMatrix,
    w_sparse: DenseMatrix,
    x: DenseMatrix,
    x_sparse: DenseMatrix,
) -> float:
    """|| w x - w_sparse x_sparse ||_F^2."""
    if w.shape != w_sparse.shape or x.shape != x_sparse.shape:
        raise ShapeError("dense and sparse operands must match in shape")
    dense = matmul(w, x)
    sparse = matmul(w_sparse, x_sparse)
    return _kernels.frob_diff_sq(dense.data, sparse.data)


def trace_errors(
    net: LayerNet,
    sparse_net: LayerNet,
    calib: CalibrationSet,
    profile=None,
    method: PruneMethod | None = None,
) -> ErrorTrace:
    """Per-layer errors with both chains propagated from calib.x0."""
    if net.L != sparse_net.L:
        raise ShapeError("nets differ in depth")
    for a, b in zip(net.layers, sparse_net.layers):
        if a.shape != b.shape:
            raise ShapeError("nets differ in layer shapes")
    _, dense_pre = forward_preacts(net, calib.x0)
    _, sparse_pre = forward_preacts(sparse_net, calib.x0)
    per_layer = tuple(
        _kernels.frob_diff_sq(d.data, s.data) for d, s in zip(dense_pre, sparse_pre)
    )
    return ErrorTrace(per_layer, sum(per_layer), profile, method)


@dataclass(frozen=True)
class Theorem1Report:
    sparsities: tuple[float, ...]
    errors: tuple[float, ...]
    monotone_fraction: float


def check_theorem1(
    w: DenseMatrix,
    x: DenseMatrix,
    sparsity_grid: Sequence[float],
    method: PruneMethod,
) -> Theorem1Report:
    """Error of one layer over an ascending sparsity grid, dense input fixed.

    Scores are computed once, so magnitude and Wanda-style masks are nested
    along the grid.
    """
    grid = [float(s) for s in sparsity_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ShapeError("sparsity grid must be ascending")
    score = score_layer(w, x, method)
    dense = matmul(w, x)
    errors = []
    for s in grid:
        w_sparse = prune_layer(w, score, s).apply(w)
        errors.append(_kernels.frob_diff_sq(dense.data, matmul(w_sparse, x).data))
    pairs = len(errors) - 1
    if pairs <= 0:
        frac = 1.0
    else:
        good = sum(1 for a, b in zip(errors, errors[1:]) if b >= a)
        frac = good / pairs
    return Theorem1Report(tuple(grid), tuple(errors), frac)


@dataclass(frozen=True)
class BoundCheck:
    layer: int  # 1-based index i of the pair (i, i+1)
    lhs: float
    rhs: float
    satisfied: bool


@dataclass(frozen=True)
class Theorem2Report:
    checks: tuple[BoundCheck, ...]
    satisfied_fraction: float
    skipped: int


def check_theorem2_bound(trace: ErrorTrace, sparse_net: LayerNet) -> Theorem2Report:
    """Evaluate err_{i+1} > sigma_min^2(W~_{i+1}) * err_i for each layer pair.

    Pairs with err_i == 0 (nothing to propagate) or an all-zero next layer
    (sigma_min undefined) are skipped.
    """
    if len(trace.per_layer) != sparse_net.L:
        raise ShapeError("trace and net differ in depth")
    checks = []
    skipped = 0
    for i in range(sparse_net.L - 1):
        err_i = trace.per_layer[i]
        w_next = sparse_net.layers[i + 1]
        if err_i == 0.0 or w_next.is_zero():
            skipped += 1
            continue
        rhs = sigma_min(w_next) ** 2 * err_i
        lhs = trace.per_layer[i + 1]
        checks.append(BoundCheck(i + 1, lhs, rhs, lhs > rhs))
    if checks:
        frac = sum(1 for c in checks if c.satisfied) / len(checks)
    else:
        frac = 1.0
    return Theorem2Report(tuple(checks), frac, skipped)


def export_trace_csv(
    trace: ErrorTrace,
    sparse_net: LayerNet,
    path,
    *,
    seed,
    version: str = _pkg_version,
) -> None:
    """Columns: layer_index, rate, error, sigma_min_sq, bound_rhs.

    ``bound_rhs`` on row i is sigma_min^2(W~_i) * err_{i-1}, the propagation
    lower bound on that layer's error; blank where undefined.
    """
    rates = list(trace.profile.rates) if trace.profile is not None else None
    rows = []
    for i, err in enumerate(trace.per_layer):
        w = sparse_net.layers[i]
        sig_sq = None if w.is_zero() else sigma_min(w) ** 2
        bound = None
        if i > 0 and sig_sq is not None and trace.per_layer[i - 1] > 0.0:
            bound = sig_sq * trace.per_layer[i - 1]
        rows.append(
            (
                i + 1,
                None if rates is None else rates[i],
                err,
                sig_sq,
                bound,
            )
        )
    write_csv(
        path,
        ("layer_index", "rate", "error", "sigma_min_sq", "bound_rhs"),
        rows,
        seed=seed,
        version=version,
    )
