"""Sampled result containers shared by the quantum and classical engines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import SpatialGrid

#: Valid tags for correlation series.
CORRELATION_KINDS = ("qm", "qm_lambda_star", "qm_lambda0", "mf", "es", "gs")


@dataclass(frozen=True)
class DensityProfile:
    """Nonnegative position density sampled on a spatial grid, Simpson-normalized to 1."""

    grid: SpatialGrid
    values: np.ndarray


@dataclass(frozen=True)
class CorrelationSeries:
    """Real correlation samples over an ascending time grid starting at tau = 0."""

    tau_values: np.ndarray
    values: np.ndarray
    kind: str = "qm"

    def __post_init__(self):
        taus = np.asarray(self.tau_values, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if taus.shape != vals.shape:
            raise ValueError("tau_values and values must have the same length")
        if taus[0] != 0.0 or np.any(np.diff(taus) <= 0):
            raise ValueError("tau grid must be ascending and start at 0")
        if self.kind not in CORRELATION_KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}")
        object.__setattr__(self, "tau_values", taus)
        object.__setattr__(self, "values", vals)


def tau_grid(tau_max: float, d_tau: float) -> np.ndarray:
    """Uniform correlation-time grid 0, d_tau, ..., tau_max."""
    n = int(round(tau_max / d_tau))
    if abs(n * d_tau - tau_max) > 1e-9 * max(1.0, tau_max):
        raise ValueError(f"tau_max={tau_max} is not a multiple of d_tau={d_tau}")
    return d_tau * np.arange(n + 1)
