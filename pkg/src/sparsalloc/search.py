"""Searching the common difference beta, plus a random-search probe.

Grid search evaluates every candidate from
:func:`sparsalloc.allocator.grid_candidates` by re-pruning the dense net
from scratch (candidates are fully independent) and scoring the result
with one of two desk-scale objectives:

* total reconstruction error of the pruned net on the calibration batch
  (default; the theory ties it directly to accuracy loss), or
* held-out loss: squared distance between dense and sparse final outputs
  on the back half of the calibration columns, pruning on the front half.

Random search samples whole mean-S profiles uniformly (with a shift-and-
clip repair to land the mean exactly) and keeps the best. It stands in
for heavyweight Bayesian optimization as an optimality probe: with ~1000
iterations on a short net it bounds how much headroom the one-parameter
grid leaves behind.

Candidate evaluations are independent; set SPARSALLOC_THREADS to evaluate
them in a thread pool. Results are assembled in candidate order, so
reports do not depend on scheduling. Wall time is kept on the in-memory
report only and never serialized, so identical inputs and seed produce
byte-identical CSV/JSON exports.
"""

from __future__ import annotations

import json
import os
import time
from array import array
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from sparsalloc import __version__ as _pkg_version
from sparsalloc._csvio import atomic_write_text, write_csv
from sparsalloc.allocator import (
    Origin,
    SparsityProfile,
    allocate_arithmetic,
    grid_candidates,
    repair_mean,
)
from sparsalloc.errors import DomainError
from sparsalloc.linalg import DenseMatrix
from sparsalloc.netmodel import CalibrationSet, LayerNet, forward
from sparsalloc.pruner import PruneMethod, WandaStyle, prune_net
from sparsalloc.reconerr import trace_errors
from sparsalloc.rng import SplitMix64
from sparsalloc import _kernels


class ObjectiveKind(Enum):
    TOTAL_RECON_ERROR = "recon"
    HELD_OUT_LOSS = "heldout"


@dataclass(frozen=True)
class SearchReport:
    """Evaluated candidates and the winner.

    ``candidates`` pairs each candidate key with its objective; the key is
    beta for grid searches and the iteration index for random searches.
    Ties break toward the smaller key.
    """

    candidates: tuple[tuple[float, float], ...]
    best_beta: float
    best_profile: SparsityProfile
    objective_kind: ObjectiveKind
    wall_time: float = field(default=0.0, compare=False)


def _split_columns(x: DenseMatrix, k: int) -> tuple[DenseMatrix, DenseMatrix]:
    if not (0 < k < x.cols):
        raise DomainError("held-out split needs at least one column per side")
    left = array("d", bytes(8 * x.rows * k))
    right = array("d", bytes(8 * x.rows * (x.cols - k)))
    for i in range(x.rows):
        base = i * x.cols
        for j in range(k):
            left[i * k + j] = x.data[base + j]
        for j in range(k, x.cols):
            right[i * (x.cols - k) + (j - k)] = x.data[base + j]
    return DenseMatrix(x.rows, k, left), DenseMatrix(x.rows, x.cols - k, right)


def evaluate_objective(
    net: LayerNet,
    calib: CalibrationSet,
    profile: SparsityProfile,
    method: PruneMethod,
    kind: ObjectiveKind,
) -> float:
    if kind is ObjectiveKind.TOTAL_RECON_ERROR:
        _, sparse = prune_net(net, calib, profile, method)
        return trace_errors(net, sparse, calib).total
    if kind is ObjectiveKind.HELD_OUT_LOSS:
        fit_x, eval_x = _split_columns(calib.x0, (calib.d + 1) // 2)
        _, sparse = prune_net(net, CalibrationSet(fit_x), profile, method)
        dense_out = forward(net, eval_x)[-1]
        sparse_out = forward(sparse, eval_x)[-1]
        return _kernels.frob_diff_sq(dense_out.data, sparse_out.data)
    raise DomainError(f"unknown objective: {kind!r}")


def _max_workers() -> int:
    raw = os.environ.get("SPARSALLOC_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _evaluate_all(profiles, net, calib, method, kind):
    workers = _max_workers()
    if workers == 1 or len(profiles) <= 1:
        return [evaluate_objective(net, calib, p, method, kind) for p in profiles]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(
            pool.map(lambda p: evaluate_objective(net, calib, p, method, kind), profiles)
        )


def grid_search_beta(
    net: LayerNet,
    calib: CalibrationSet,
    S: float,
    step: float = 0.002,
    method: PruneMethod = WandaStyle(),
    objective: ObjectiveKind = ObjectiveKind.TOTAL_RECON_ERROR,
) -> SearchReport:
    """Evaluate every admissible beta on the grid; smallest beta wins ties."""
    t0 = time.perf_counter()
    betas = grid_candidates(S, net.L, step)
    profiles = [allocate_arithmetic(S, net.L, b) for b in betas]
    objectives = _evaluate_all(profiles, net, calib, method, objective)
    best_i = 0
    for i in range(1, len(betas)):
        if objectives[i] < objectives[best_i]:
            best_i = i
    return SearchReport(
        candidates=tuple(zip(betas, objectives)),
        best_beta=betas[best_i],
        best_profile=profiles[best_i],
        objective_kind=objective,
        wall_time=time.perf_counter() - t0,
    )


def step_ablation(
    net: LayerNet,
    calib: CalibrationSet,
    S: float,
    steps,
    method: PruneMethod = WandaStyle(),
    objective: ObjectiveKind = ObjectiveKind.TOTAL_RECON_ERROR,
) -> list[tuple[float, SearchReport]]:
    """One grid search per step size; finer nested grids can only improve."""
    out = []
    for step in steps:
        if step <= 0.0:
            raise DomainError(f"step must be positive, got {step}")
        out.append((step, grid_search_beta(net, calib, S, step, method, objective)))
    return out


def sample_profile(L: int, S: float, rng: SplitMix64) -> SparsityProfile:
    """Uniform rates repaired to mean exactly S."""
    raw = [rng.next_float() for _ in range(L)]
    rates = repair_mean(raw, S)
    return SparsityProfile(tuple(rates), float(S), None, Origin.RANDOM_SEARCH)


def random_search_profiles(
    net: LayerNet,
    calib: CalibrationSet,
    S: float,
    iters: int,
    seed: int,
    method: PruneMethod = WandaStyle(),
    objective: ObjectiveKind = ObjectiveKind.TOTAL_RECON_ERROR,
) -> SearchReport:
    """Best of ``iters`` random mean-S profiles; candidate key = iteration."""
    if iters < 1:
        raise DomainError(f"need at least one iteration, got {iters}")
    t0 = time.perf_counter()
    rng = SplitMix64(seed)
    profiles = [sample_profile(net.L, S, rng) for _ in range(iters)]
    objectives = _evaluate_all(profiles, net, calib, method, objective)
    best_i = 0
    for i in range(1, iters):
        if objectives[i] < objectives[best_i]:
            best_i = i
    return SearchReport(
        candidates=tuple((float(i), obj) for i, obj in enumerate(objectives)),
        best_beta=float(best_i),
        best_profile=profiles[best_i],
        objective_kind=objective,
        wall_time=time.perf_counter() - t0,
    )


def export_report_csv(
    report: SearchReport,
    path,
    *,
    seed,
    version: str = _pkg_version,
    key_name: str = "beta",
) -> None:
    """Candidate table; ``key_name`` labels the first column ("iteration"
    for random-search reports, where the key is not a beta)."""
    write_csv(
        path,
        (key_name, "objective"),
        report.candidates,
        seed=seed,
        version=version,
    )


def report_to_json(report: SearchReport) -> str:
    doc = {
        "objective_kind": report.objective_kind.value,
        "best_beta": report.best_beta,
        "best_profile": {
            "origin": report.best_profile.origin.value,
            "S": report.best_profile.mean,
            "rates": list(report.best_profile.rates),
        },
        "candidates": [[b, o] for b, o in report.candidates],
    }
    if report.best_profile.beta is not None:
        doc["best_profile"]["beta"] = report.best_profile.beta
    return json.dumps(doc, sort_keys=True, indent=2)


def export_report_json(report: SearchReport, path) -> None:
    atomic_write_text(path, report_to_json(report) + "\n")
