"""Deterministic PRNG used everywhere reproducibility matters.

xorshift64* with the standard multiplier. Chosen over random.Random so the
byte-level behavior is pinned by this repo, not by the Python version.
"""

from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_MULT = 2685821657736338717
_SEED_FILL = 0x9E3779B97F4A7C15  # xorshift state must be nonzero


class Rng:
    def __init__(self, seed: int):
        self._state = (seed & _MASK) or _SEED_FILL

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _MASK
        x ^= x >> 27
        self._state = x
        return (x * _MULT) & _MASK

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform_range(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def gauss(self) -> float:
        """Standard normal via Box-Muller; draws exactly two uniforms."""
        u1 = self.uniform()
        u2 = self.uniform()
        while u1 <= 0.0:
            u1 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
