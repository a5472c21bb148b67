"""Per-layer sparsity profiles.

The central allocator builds a monotonically increasing arithmetic
progression of rates around a target average S:

    s_i = S - beta * (L - 1) / 2 + beta * (i - 1),   i = 1..L

so the whole allocation reduces to one hyperparameter, the common
difference beta. Keeping every rate inside [0, 1] with an increasing
progression bounds beta by min(2S, 2(1-S)) / (L - 1); a grid over that
range (see :func:`grid_candidates`) needs only a handful of trials, e.g.
9 positive candidates at step 0.002 for L=32, S=0.7. Beta 0 is admitted
as the uniform fallback even though the theory wants beta > 0, so a
searched profile can never lose to uniform on the search objective.

Baselines (uniform, ERK, LAMP, global-threshold) and permutation
utilities are provided for comparison experiments.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

from sparsalloc.errors import DomainError, ShapeError
from sparsalloc.netmodel import CalibrationSet, LayerNet, forward
from sparsalloc.pruner import Magnitude, PruneMethod, WandaStyle, score_layer

_MEAN_TOL = 1e-12
_EDGE_TOL = 1e-12


class Origin(Enum):
    UNIFORM = "uniform"
    ARITHMETIC = "arithmetic"
    ERK = "erk"
    LAMP = "lamp"
    GLOBAL = "global"
    RANDOM_SEARCH = "random_search"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class SparsityProfile:
    """Per-layer rates plus their average S and, when arithmetic, beta."""

    rates: tuple[float, ...]
    mean: float
    beta: float | None = None
    origin: Origin = Origin.EXPLICIT

    def __post_init__(self):
        if not self.rates:
            raise DomainError("profile needs at least one rate")
        for s in self.rates:
            if not (0.0 <= s <= 1.0):
                raise DomainError(f"rate {s} outside [0, 1]")
        actual = math.fsum(self.rates) / len(self.rates)
        if abs(actual - self.mean) > _MEAN_TOL:
            raise DomainError(
                f"profile mean {actual!r} does not match declared S={self.mean!r}"
            )
        if self.origin is Origin.ARITHMETIC and self.beta is not None:
            for i in range(len(self.rates) - 1):
                if abs((self.rates[i + 1] - self.rates[i]) - self.beta) > 1e-12:
                    raise DomainError("rates are not an arithmetic progression")

    @property
    def L(self) -> int:
        return len(self.rates)


def beta_upper_bound(S: float, L: int) -> float:
    """Largest admissible common difference: min(2S, 2(1-S)) / (L-1)."""
    if not (0.0 < S < 1.0):
        raise DomainError(f"average sparsity must lie in (0, 1), got {S}")
    if L < 2:
        raise DomainError(f"need at least 2 layers, got {L}")
    return min(2.0 * S, 2.0 * (1.0 - S)) / (L - 1)


def allocate_arithmetic(S: float, L: int, beta: float) -> SparsityProfile:
    """Arithmetic-progression profile with mean exactly S.

    beta = 0 yields the uniform fallback; otherwise beta must not exceed
    :func:`beta_upper_bound` (inclusive, with 1e-12 slack for grid points
    landing on the bound).
    """
    if beta < 0.0:
        raise DomainError(f"beta must be >= 0, got {beta}")
    if beta == 0.0:
        if L < 1:
            raise DomainError("need at least one layer")
        if not (0.0 <= S <= 1.0):
            raise DomainError(f"average sparsity {S} outside [0, 1]")
        return SparsityProfile((float(S),) * L, float(S), 0.0, Origin.ARITHMETIC)
    bound = beta_upper_bound(S, L)
    if beta > bound + _EDGE_TOL:
        raise DomainError(f"beta {beta} exceeds the admissible bound {bound}")
    rates = []
    start = S - beta * (L - 1) / 2.0
    for i in range(L):
        s = start + beta * i
        if s < 0.0:
            if s < -_EDGE_TOL:
                raise DomainError(f"rate {s} below 0 at layer {i + 1}")
            s = 0.0
        elif s > 1.0:
            if s > 1.0 + _EDGE_TOL:
                raise DomainError(f"rate {s} above 1 at layer {i + 1}")
            s = 1.0
        rates.append(s)
    return SparsityProfile(tuple(rates), float(S), beta, Origin.ARITHMETIC)


def grid_candidates(S: float, L: int, step: float) -> list[float]:
    """The searched beta grid: 0 (uniform fallback) plus every positive
    multiple of ``step`` up to the bound, boundary inclusive."""
    if step <= 0.0:
        raise DomainError(f"step must be positive, got {step}")
    bound = beta_upper_bound(S, L)
    out = [0.0]
    k = 1
    while k * step <= bound + _EDGE_TOL:
        out.append(k * step)
        k += 1
    return out


def allocate_uniform(S: float, L: int) -> SparsityProfile:
    if L < 1:
        raise DomainError("need at least one layer")
    if not (0.0 <= S <= 1.0):
        raise DomainError(f"average sparsity {S} outside [0, 1]")
    return SparsityProfile((float(S),) * L, float(S), None, Origin.UNIFORM)


def allocate_explicit(rates: Sequence[float], origin: Origin = Origin.EXPLICIT) -> SparsityProfile:
    rates = tuple(float(s) for s in rates)
    return SparsityProfile(rates, math.fsum(rates) / len(rates), None, origin)


def repair_mean(rates: Sequence[float], S: float, max_iter: int = 200) -> list[float]:
    """Shift rates uniformly (clipping to [0, 1]) until their mean is S.

    The shift is spread over the entries still free to move in the needed
    direction, so the loop converges geometrically for any feasible S.
    """
    L = len(rates)
    r = [min(1.0, max(0.0, float(v))) for v in rates]
    for _ in range(max_iter):
        delta = S - math.fsum(r) / L
        if abs(delta) <= 1e-13:
            break
        movable = [
            i
            for i in range(L)
            if (delta > 0 and r[i] < 1.0) or (delta < 0 and r[i] > 0.0)
        ]
        if not movable:
            raise DomainError(f"cannot reach mean {S} by shifting within [0, 1]")
        step = delta * L / len(movable)
        for i in movable:
            r[i] = min(1.0, max(0.0, r[i] + step))
    if abs(S - math.fsum(r) / L) > _MEAN_TOL:
        raise DomainError(f"mean repair did not converge to {S}")
    return r


def _erk_densities(shapes: Sequence[tuple[int, int]], mean_density: float) -> list[float]:
    # Water-filling: density_i proportional to (c_in + c_out) / (c_in * c_out),
    # capped at 1, residual mass redistributed over uncapped layers.
    L = len(shapes)
    raw = [(r + c) / (r * c) for r, c in shapes]
    capped = [False] * L
    dens = [0.0] * L
    budget = mean_density * L
    for _ in range(100):
        free = [i for i in range(L) if not capped[i]]
        if not free:
            raise DomainError("ERK water-filling infeasible: all layers capped")
        remaining = budget - sum(1.0 for i in range(L) if capped[i])
        if remaining < 0.0:
            raise DomainError("ERK water-filling infeasible: budget exhausted")
        gamma = remaining / math.fsum(raw[i] for i in free)
        overfull = [i for i in free if gamma * raw[i] > 1.0]
        if not overfull:
            for i in free:
                dens[i] = gamma * raw[i]
            for i in range(L):
                if capped[i]:
                    dens[i] = 1.0
            return dens
        for i in overfull:
            capped[i] = True
    raise DomainError("ERK water-filling did not converge")


def allocate_erk(net: LayerNet, S: float) -> SparsityProfile:
    """ERK-style profile: layer density scales with (c_in+c_out)/(c_in*c_out)."""
    if not (0.0 < S < 1.0):
        raise DomainError(f"average sparsity must lie in (0, 1), got {S}")
    shapes = [w.shape for w in net.layers]
    dens = _erk_densities(shapes, 1.0 - S)
    rates = repair_mean([1.0 - d for d in dens], S)
    return SparsityProfile(tuple(rates), float(S), None, Origin.ERK)


def _rates_from_global_scores(score_lists: Sequence[Sequence[float]], S: float) -> list[float]:
    # One network-wide threshold; entries tied at the threshold are pruned
    # fractionally in proportion to each layer's tied count, so degenerate
    # all-equal scores yield a uniform profile instead of filling layer 1.
    sizes = [len(s) for s in score_lists]
    total = sum(sizes)
    k_total = S * total
    all_vals = sorted(v for s in score_lists for v in s)
    kth = max(1, min(total, math.ceil(k_total)))
    threshold = all_vals[kth - 1]
    count_lt = sum(1 for v in all_vals if v < threshold)
    count_eq = sum(1 for v in all_vals if v == threshold)
    alpha = 0.0
    if count_eq > 0:
        alpha = min(1.0, max(0.0, (k_total - count_lt) / count_eq))
    rates = []
    for scores in score_lists:
        lt = sum(1 for v in scores if v < threshold)
        eq = sum(1 for v in scores if v == threshold)
        rates.append((lt + alpha * eq) / len(scores))
    return rates


def allocate_global(
    net: LayerNet,
    S: float,
    calib: CalibrationSet | None = None,
    method: PruneMethod = Magnitude(),
) -> SparsityProfile:
    """Rates implied by one global score threshold across all layers."""
    if not (0.0 < S < 1.0):
        raise DomainError(f"average sparsity must lie in (0, 1), got {S}")
    if isinstance(method, WandaStyle):
        if calib is None:
            raise ShapeError("global Wanda-style allocation needs calibration data")
        acts = forward(net, calib.x0)
    score_lists = []
    for i, w in enumerate(net.layers):
        x = acts[i] if isinstance(method, WandaStyle) else None
        score_lists.append(list(score_layer(w, x, method).data))
    rates = repair_mean(_rates_from_global_scores(score_lists, S), S)
    return SparsityProfile(tuple(rates), float(S), None, Origin.GLOBAL)


def _lamp_scores(w) -> list[float]:
    # LAMP score: w_u^2 divided by the sum of w_v^2 over all v with
    # |w_v| >= |w_u| (self included), computed per layer.
    vals = [v * v for v in w.data]
    order = sorted(range(len(vals)), key=vals.__getitem__)
    scores = [0.0] * len(vals)
    suffix = 0.0
    for idx in reversed(order):
        suffix += vals[idx]
        scores[idx] = vals[idx] / suffix if suffix > 0.0 else 0.0
    return scores


def allocate_lamp(net: LayerNet, S: float) -> SparsityProfile:
    """Rates from globally ranking per-layer LAMP scores."""
    if not (0.0 < S < 1.0):
        raise DomainError(f"average sparsity must lie in (0, 1), got {S}")
    score_lists = [_lamp_scores(w) for w in net.layers]
    rates = repair_mean(_rates_from_global_scores(score_lists, S), S)
    return SparsityProfile(tuple(rates), float(S), None, Origin.LAMP)


def permutations_of(profile: SparsityProfile) -> Iterator[SparsityProfile]:
    """Every distinct ordering of the profile's rate multiset (L <= 8)."""
    if profile.L > 8:
        raise DomainError(f"exhaustive permutations limited to L <= 8, got {profile.L}")
    for perm in sorted(set(itertools.permutations(profile.rates))):
        yield SparsityProfile(perm, profile.mean, None, Origin.EXPLICIT)


def nm_allocation(profile: SparsityProfile, m: int) -> list[int]:
    """Integer per-layer keep counts N_i for mixed N:M pruning.

    Largest-remainder rounding of (1 - s_i) * m, constrained so the total
    keep budget round((1-S) * m * L) is met exactly and 0 <= N_i <= m.
    Ties favor earlier layers, which the profile keeps denser anyway.
    """
    if m < 1:
        raise DomainError(f"group size must be >= 1, got {m}")
    keeps = [(1.0 - s) * m for s in profile.rates]
    total = _round_budget(math.fsum(keeps))
    base = [min(m, int(k)) for k in keeps]
    fracs = [keeps[i] - base[i] for i in range(len(keeps))]
    ns = list(base)
    deficit = total - sum(ns)
    if deficit < 0:
        order = sorted(range(len(ns)), key=lambda i: (fracs[i], -i))
        for i in order:
            if deficit == 0:
                break
            if ns[i] > 0:
                ns[i] -= 1
                deficit += 1
    else:
        order = sorted(range(len(ns)), key=lambda i: (-fracs[i], i))
        while deficit > 0:
            moved = False
            for i in order:
                if deficit == 0:
                    break
                if ns[i] < m:
                    ns[i] += 1
                    deficit -= 1
                    moved = True
            if not moved:
                raise DomainError("N:M keep budget exceeds capacity")
    return ns


def _round_budget(x: float) -> int:
    return int(math.floor(x + 0.5))


def profile_to_json(profile: SparsityProfile) -> str:
    doc = {
        "origin": profile.origin.value,
        "S": profile.mean,
        "rates": list(profile.rates),
    }
    if profile.beta is not None:
        doc["beta"] = profile.beta
    return json.dumps(doc, sort_keys=True)


def profile_from_json(text: str) -> SparsityProfile:
    doc = json.loads(text)
    try:
        origin = Origin(doc["origin"])
        rates = tuple(float(v) for v in doc["rates"])
        mean = float(doc["S"])
    except (KeyError, ValueError, TypeError) as exc:
        raise DomainError(f"malformed profile document: {exc}") from exc
    beta = doc.get("beta")
    return SparsityProfile(rates, mean, None if beta is None else float(beta), origin)


def save_profile(profile: SparsityProfile, path) -> None:
    from sparsalloc._csvio import atomic_write_text

    atomic_write_text(path, profile_to_json(profile) + "\n")


def load_profile(path) -> SparsityProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return profile_from_json(fh.read())
