"""Deterministic counter-based random number generation.

Every stochastic operation in the package draws from :class:`SplitMix64`,
a 64-bit counter-based generator chosen so that any implementation, in any
language, can reproduce the exact streams from the integer seed alone.

Stream definition (all arithmetic mod 2**64):

* state update:  ``state += 0x9E3779B97F4A7C15``
* output mix:    ``z = state``;
  ``z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9``;
  ``z = (z ^ (z >> 27)) * 0x94D049BB133111EB``;
  ``z = z ^ (z >> 31)``
* doubles in [0, 1): ``(z >> 11) * 2**-53``
* uniform(lo, hi):   ``lo + (hi - lo) * next_float()``
* standard normal:   Box-Muller without caching, consuming exactly two
  outputs per draw: ``sqrt(-2 ln u1) * cos(2 pi u2)`` with
  ``u1 = ((z1 >> 11) + 1) * 2**-53`` (so u1 > 0) and
  ``u2 = (z2 >> 11) * 2**-53``.
"""

import math
from array import array

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 2.0 ** -53


class SplitMix64:
    """SplitMix64 generator; see the module docstring for the exact stream."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * _INV53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()

    def normal(self) -> float:
        u1 = ((self.next_u64() >> 11) + 1) * _INV53
        u2 = (self.next_u64() >> 11) * _INV53
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] by modular reduction (range bias is fine here)."""
        return lo + self.next_u64() % (hi - lo + 1)

    def fill_uniform(self, n: int, lo: float, hi: float) -> array:
        out = array("d", bytes(8 * n))
        for i in range(n):
            out[i] = lo + (hi - lo) * self.next_float()
        return out

    def fill_normal(self, n: int) -> array:
        out = array("d", bytes(8 * n))
        for i in range(n):
            out[i] = self.normal()
        return out
