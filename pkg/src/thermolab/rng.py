"""Deterministic random numbers reproducible across languages.

A fixed 32-bit linear congruential generator,

    state_{k+1} = (1664525 * state_k + 1013904223) mod 2**32,

with uniforms taken as state / 2**32.  The multiplier/increment pair is the
classic Numerical Recipes choice; any implementation of the same recurrence
reproduces our random right-hand sides and initial data sample-for-sample.
numpy generators are deliberately not used here: their bit streams are not a
contract we can document in one line.
"""

from __future__ import annotations

import numpy as np

_A = 1664525
_C = 1013904223
_M = 2**32


class Lcg:
    """Seeded linear congruential generator (see module docstring)."""

    def __init__(self, seed: int = 42):
        self.state = int(seed) % _M

    def next_u32(self) -> int:
        self.state = (_A * self.state + _C) % _M
        return self.state

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Uniform sample in [lo, hi)."""
        return lo + (hi - lo) * (self.next_u32() / _M)

    def uniforms(self, size: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        return np.array([self.uniform(lo, hi) for _ in range(size)])
