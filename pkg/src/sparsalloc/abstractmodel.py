"""Analytical recurrence model of error propagation through depth.

Each layer contributes f(s_i), an increasing function of its own sparsity
rate, and amplifies everything accumulated before it by a factor c > 1:

    err_1 = f(s_1),    err_{i+1} = c * err_i + f(s_{i+1}).

Under this model, swapping an adjacent out-of-order pair (s_k > s_{k+1})
strictly lowers the total error, and the ascending arrangement of any rate
multiset is the unique minimizer over all orderings. Both facts are exact
and checkable by enumeration, which :func:`verify_theorem4` does for
L <= 8.

The model does not prescribe c or the shape of f beyond monotonicity, so
three increasing families are provided and the ordering conclusions can be
tested across all of them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from sparsalloc import __version__ as _pkg_version
from sparsalloc._csvio import write_csv
from sparsalloc.errors import DomainError


@dataclass(frozen=True)
class SquareF:
    """f(s) = s^2."""

    def __call__(self, s: float) -> float:
        return s * s


@dataclass(frozen=True)
class RatioF:
    """f(s) = s / (1 - s + eps); steep near full sparsity."""

    eps: float = 0.1

    def __post_init__(self):
        if self.eps <= 0.0:
            raise DomainError("eps must be positive for f to stay increasing")

    def __call__(self, s: float) -> float:
        return s / (1.0 - s + self.eps)


@dataclass(frozen=True)
class ExpF:
    """f(s) = e^{k s} - 1."""

    k: float = 1.0

    def __post_init__(self):
        if self.k <= 0.0:
            raise DomainError("k must be positive for f to stay increasing")

    def __call__(self, s: float) -> float:
        return math.exp(self.k * s) - 1.0


GrowthFn = Union[SquareF, RatioF, ExpF]


@dataclass(frozen=True)
class AbstractErrorParams:
    """Propagation factor c > 1 and the per-layer growth function f."""

    c: float = 1.5
    f: GrowthFn = SquareF()

    def __post_init__(self):
        if not self.c > 1.0:
            raise DomainError(f"propagation factor must exceed 1, got {self.c}")


def recurrence_total(
    rates: Sequence[float], params: AbstractErrorParams
) -> tuple[list[float], float]:
    """Evaluate the recurrence exactly; returns (per-layer errors, total)."""
    for s in rates:
        if not (0.0 <= s <= 1.0):
            raise DomainError(f"rate {s} outside [0, 1]")
    if not rates:
        raise DomainError("need at least one rate")
    f = params.f
    per_layer = [f(rates[0])]
    for s in rates[1:]:
        per_layer.append(params.c * per_layer[-1] + f(s))
    return per_layer, math.fsum(per_layer)


def swap_gain(rates: Sequence[float], k: int, params: AbstractErrorParams) -> float:
    """Total-error reduction from swapping positions k and k+1 (0-based k).

    Positive exactly when rates[k] > rates[k+1]. For the last pair (and so
    for any two-layer chain) the gain reduces to the closed form
    c * (f(rates[k]) - f(rates[k+1])); earlier pairs also feed the swap
    difference through every later layer, scaling the gain by further
    powers of c.
    """
    rates = list(rates)
    if not (0 <= k < len(rates) - 1):
        raise DomainError(f"swap index {k} out of range for L={len(rates)}")
    _, before = recurrence_total(rates, params)
    rates[k], rates[k + 1] = rates[k + 1], rates[k]
    _, after = recurrence_total(rates, params)
    return before - after


@dataclass(frozen=True)
class Theorem4Report:
    """Exhaustive ranking of every distinct ordering of a rate multiset."""

    rates_ascending: tuple[float, ...]
    ranking: tuple[tuple[tuple[int, ...], float], ...]  # (perm indices, total)
    ascending_total: float
    holds: bool  # ascending total is the unique strict minimum
    all_equal: bool


def _distinct_permutation_indices(n: int, rates: Sequence[float]):
    # Yields index permutations producing distinct value orderings. With
    # all-distinct rates (the common case) every permutation qualifies and
    # the dedup bookkeeping is skipped.
    import itertools

    if len(set(rates)) == n:
        for perm in itertools.permutations(range(n)):
            yield perm, perm
        return
    seen = set()
    for perm in itertools.permutations(range(n)):
        key = tuple(rates[i] for i in perm)
        if key in seen:
            continue
        seen.add(key)
        yield perm, key


def verify_theorem4(
    rates_multiset: Sequence[float], params: AbstractErrorParams
) -> Theorem4Report:
    """Check that the ascending ordering minimizes the recurrence total.

    Enumerates every distinct ordering (L <= 8), evaluates the recurrence,
    and reports whether the ascending arrangement attains the strict unique
    minimum (strictness waived when all rates are equal, where every
    ordering coincides).
    """
    rates = sorted(float(s) for s in rates_multiset)
    L = len(rates)
    if L > 8:
        raise DomainError(f"exhaustive verification limited to L <= 8, got {L}")
    if L == 0:
        raise DomainError("need at least one rate")
    c = params.c
    f = params.f
    fvals = [f(s) for s in rates]

    results = []
    for perm, _key in _distinct_permutation_indices(L, rates):
        acc = fvals[perm[0]]
        total = acc
        for j in range(1, L):
            acc = c * acc + fvals[perm[j]]
            total += acc
        results.append((perm, total))

    ascending = tuple(range(L))
    asc_total = next(t for p, t in results if p == ascending)
    all_equal = len(set(rates)) == 1
    if all_equal:
        holds = all(t == asc_total for _, t in results)
    else:
        holds = all(t > asc_total for p, t in results if p != ascending)
    ranking = tuple(sorted(results, key=lambda pt: (pt[1], pt[0])))
    return Theorem4Report(tuple(rates), ranking, asc_total, holds, all_equal)


def export_theorem4_csv(
    report: Theorem4Report, path, *, seed, version: str = _pkg_version
) -> None:
    """Columns: permutation (indices into the ascending multiset), total."""
    rows = [
        (" ".join(str(i) for i in perm), total) for perm, total in report.ranking
    ]
    write_csv(path, ("permutation", "total"), rows, seed=seed, version=version)
