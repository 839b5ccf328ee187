"""Uniform spatial and phase-space grids.

Both grids are defined by segment counts, so a grid with K segments has
K + 1 nodes.  Composite Simpson quadrature requires even segment counts;
the phase grid enforces this at construction time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform 1D grid with nodes x_k = x_min + k*dx, k = 0..K."""

    x_min: float
    x_max: float
    K: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.K < 8:
            raise ValueError(f"need K >= 8 (stencil width), got K={self.K}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.K

    @property
    def nodes(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.K + 1)


@dataclass(frozen=True)
class PhaseGrid:
    """Tensor-product (x, p) grid with even segment counts Lx, Lp."""

    x_min: float
    x_max: float
    Lx: int
    p_min: float
    p_max: float
    Lp: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.p_min < self.p_max):
            raise ValueError("phase grid ranges must be increasing")
        if self.Lx % 2 or self.Lp % 2 or self.Lx < 2 or self.Lp < 2:
            raise ValueError("composite Simpson needs even, positive segment counts")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.Lx

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / self.Lp

    @property
    def x_nodes(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.Lx + 1)

    @property
    def p_nodes(self) -> np.ndarray:
        return self.p_min + self.dp * np.arange(self.Lp + 1)


def default_p_max(beta: float) -> float:
    """Momentum cutoff with exp(-beta*p_max^2/2) <= exp(-28) < 1e-12."""
    return max(6.0, math.sqrt(56.0 / beta))


def default_phase_grid(beta: float, x_min: float = -6.0, x_max: float = 6.0,
                       L: int = 240, p_max: float | None = None) -> PhaseGrid:
    """Phase grid used by the classical correlation quadratures."""
    if p_max is None:
        p_max = default_p_max(beta)
    return PhaseGrid(x_min, x_max, L, -p_max, p_max, L)
