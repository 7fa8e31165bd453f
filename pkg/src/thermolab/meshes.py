"""Graded partitions of [0, 1] resolving the x = 0 degeneracy.

Nodes follow x_i = (i/n)**gamma; gamma = 1 is the uniform mesh, gamma > 1
clusters nodes at the degenerate endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profiles import DegeneracyClass, DegeneracyProfile

__all__ = ["Mesh", "default_gamma"]


@dataclass(frozen=True)
class Mesh:
    n: int
    gamma: float
    nodes: np.ndarray

    @classmethod
    def graded(cls, n: int, gamma: float = 1.0) -> "Mesh":
        if n < 2:
            raise ValueError("need at least 2 elements")
        if gamma < 1.0:
            raise ValueError("grading exponent must be >= 1")
        i = np.arange(n + 1, dtype=float)
        nodes = (i / n) ** gamma
        nodes[0], nodes[-1] = 0.0, 1.0
        return cls(n=n, gamma=float(gamma), nodes=nodes)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]


def default_gamma(profile: DegeneracyProfile) -> float:
    """Grading rule: quadratic clustering once the degeneracy is strong
    enough to need it (power exponent >= 0.5), uniform otherwise."""
    if profile.klass not in (DegeneracyClass.WDP, DegeneracyClass.SDP):
        return 1.0
    if profile.kind == "power_law":
        return 2.0 if profile.alpha >= 0.5 else 1.0
    return 2.0
