"""Classical Hamiltonian flows and phase-space Gibbs quadrature.

Correlation functions are computed as deterministic tensor-product composite
Simpson quadratures over initial conditions z_0 = (x_0, p_0): one velocity
Verlet trajectory is integrated per quadrature node and the correlation is
harvested from the same trajectory at every requested tau.

Three approximations share this machinery:

  mf  - flow driven by the mean-field potential lam_*, weight Tr e^{-beta H}
        = (e^{-beta lam_0} + e^{-beta lam_1}) e^{-beta p^2/2};
  gs  - flow driven by lam_0, weight e^{-beta(p^2/2 + lam_0)};
  es  - one flow per eigenvalue, jointly normalized over both states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainTooSmall
from .grids import PhaseGrid, SpatialGrid
from .model import (ModelContext, eigenvalue_gradients, eigenvalues,
                    mean_field_gradient, mean_field_potential)
from .quadrature import composite_simpson, simpson_weights
from .series import CorrelationSeries, DensityProfile

#: Relative Gibbs weight e^{-beta(h - h_min)} allowed on the phase-grid boundary.
PHASE_BOUNDARY_TOL = 1e-12

#: Force labels accepted by FlowConfig and force_function.
FORCE_KINDS = ("lambda_star", "lambda0", "lambda1")


@dataclass(frozen=True)
class PhasePoint:
    x: float
    p: float


@dataclass(frozen=True)
class FlowConfig:
    """Verlet step size and, for standalone trajectory runs, the driving potential."""

    dt: float = 0.005
    force: str = "lambda_star"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.force not in FORCE_KINDS:
            raise ValueError(f"force must be one of {FORCE_KINDS}, got {self.force!r}")


def force_function(ctx: ModelContext, which: str) -> Callable[[np.ndarray], np.ndarray]:
    """Force F(x) = -dV/dx for the requested scalar potential."""
    if which == "lambda_star":
        return lambda x: -mean_field_gradient(x, ctx)
    if which == "lambda0":
        return lambda x: -eigenvalue_gradients(x, ctx.params)[0]
    if which == "lambda1":
        return lambda x: -eigenvalue_gradients(x, ctx.params)[1]
    raise ValueError(f"unknown force kind {which!r}")


def verlet_integrate(z0, force: Callable[[np.ndarray], np.ndarray],
                     dt: float, n: int) -> np.ndarray:
    """Velocity Verlet trajectory from z0; returns an (n+1, 2) array of (x, p).

    One half-kick / drift / half-kick per step with unit mass:

        p_{n+1/2} = p_n + (dt/2) F(x_n)
        x_{n+1}   = x_n + dt p_{n+1/2}
        p_{n+1}   = p_{n+1/2} + (dt/2) F(x_{n+1})
    """
    if hasattr(z0, "x"):
        x0v, p0v = float(z0.x), float(z0.p)
    else:
        x0v, p0v = float(z0[0]), float(z0[1])
    x = np.array([x0v])
    p = np.array([p0v])
    traj = np.empty((n + 1, 2))
    traj[0] = x[0], p[0]
    f = np.asarray(force(x), dtype=float)
    for k in range(1, n + 1):
        p += (0.5 * dt) * f
        x += dt * p
        f = np.asarray(force(x), dtype=float)
        p += (0.5 * dt) * f
        traj[k] = x[0], p[0]
    return traj


def simpson_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], grid: PhaseGrid) -> float:
    """Tensor-product composite Simpson integral of f(x, p) over the phase grid."""
    wx = simpson_weights(grid.Lx, grid.dx)
    wp = simpson_weights(grid.Lp, grid.dp)
    xs, ps = np.meshgrid(grid.x_nodes, grid.p_nodes, indexing="ij")
    return float(wx @ np.asarray(f(xs, ps), dtype=float) @ wp)


def _normalized_profile(grid: SpatialGrid, unnormalized: np.ndarray) -> DensityProfile:
    edge = max(unnormalized[0], unnormalized[-1]) / unnormalized.max()
    if edge > PHASE_BOUNDARY_TOL:
        raise DomainTooSmall(
            f"classical density weight at grid endpoints is {edge:.3e} relative; "
            "widen the spatial grid")
    return DensityProfile(grid, unnormalized / composite_simpson(unnormalized, grid.dx))


def density_mf(ctx: ModelContext, grid: SpatialGrid) -> DensityProfile:
    """Mean-field equilibrium density proportional to e^{-beta lam_0} + e^{-beta lam_1}."""
    lam0, lam1 = eigenvalues(grid.nodes, ctx.params)
    shift = lam0.min()
    g = np.exp(-ctx.beta * (lam0 - shift)) + np.exp(-ctx.beta * (lam1 - shift))
    return _normalized_profile(grid, g)


def density_gs(ctx: ModelContext, grid: SpatialGrid) -> DensityProfile:
    """Ground-state equilibrium density proportional to e^{-beta lam_0}."""
    lam0, _ = eigenvalues(grid.nodes, ctx.params)
    g = np.exp(-ctx.beta * (lam0 - lam0.min()))
    return _normalized_profile(grid, g)


def _snap_every(taus: np.ndarray, dt: float) -> tuple[int, int]:
    taus = np.asarray(taus, dtype=float)
    if taus[0] != 0.0:
        raise ValueError("tau grid must start at 0")
    if len(taus) == 1:
        return 0, 1
    d_tau = taus[1] - taus[0]
    if np.max(np.abs(np.diff(taus) - d_tau)) > 1e-9:
        raise ValueError("tau grid must be uniform")
    every = int(round(d_tau / dt))
    if every < 1 or abs(every * dt - d_tau) > 1e-9:
        raise ValueError(f"d_tau={d_tau} must be a positive integer multiple of dt={dt}")
    return every, len(taus)


def _quadrature_nodes(ctx: ModelContext, pgrid: PhaseGrid):
    """Flattened initial conditions, Simpson weights, and Gibbs factors.

    Returns (x0, p0, w_simpson, g0, g1, gp) where g_j = e^{-beta(lam_j - min lam_0)}
    on the x-nodes (broadcast over p) and gp = e^{-beta p^2/2}.  Raises
    DomainTooSmall unless e^{-beta(h - h_min)} <= 1e-12 along the grid boundary,
    where h = p^2/2 + lam_*.
    """
    xs, ps = pgrid.x_nodes, pgrid.p_nodes
    lam_star = mean_field_potential(xs, ctx)
    h = lam_star[:, None] + 0.5 * ps[None, :] ** 2
    rel = np.exp(-ctx.beta * (h - h.min()))
    edge = max(rel[0].max(), rel[-1].max(), rel[:, 0].max(), rel[:, -1].max())
    if edge > PHASE_BOUNDARY_TOL:
        raise DomainTooSmall(
            f"phase-space Gibbs weight on the boundary is {edge:.3e} relative "
            f"(needs <= {PHASE_BOUNDARY_TOL:g}); enlarge the phase grid")
    lam0, lam1 = eigenvalues(xs, ctx.params)
    shift = lam0.min()
    g0 = np.exp(-ctx.beta * (lam0 - shift))
    g1 = np.exp(-ctx.beta * (lam1 - shift))
    gp = np.exp(-0.5 * ctx.beta * ps**2)
    w2 = np.outer(simpson_weights(pgrid.Lx, pgrid.dx), simpson_weights(pgrid.Lp, pgrid.dp))
    x0, p0 = (m.ravel() for m in np.meshgrid(xs, ps, indexing="ij"))
    return (x0, p0, w2.ravel(),
            np.repeat(g0, len(ps)), np.repeat(g1, len(ps)), np.tile(gp, len(xs)))


def _flow_numerators(ctx, which, x0, p0, dt, taus, observable, weights):
    """Integrate one flow over all nodes, accumulating sum(w * O(z_tau) * O(z_0))
    at each tau for every weight vector in `weights`."""
    every, n_snaps = _snap_every(taus, dt)
    force = force_function(ctx, which)
    x, p = x0.copy(), p0.copy()
    o0 = x0 if observable == "x" else p0
    wo = [w * o0 for w in weights]
    nums = np.empty((len(weights), n_snaps))
    cur = x if observable == "x" else p
    for i, w in enumerate(wo):
        nums[i, 0] = w @ cur
    f = force(x)
    for s in range(1, n_snaps):
        for _ in range(every):
            p += (0.5 * dt) * f
            x += dt * p
            f = force(x)
            p += (0.5 * dt) * f
        cur = x if observable == "x" else p
        for i, w in enumerate(wo):
            nums[i, s] = w @ cur
    return nums


def _check_observable(observable: str):
    if observable not in ("p", "x"):
        raise ValueError(f"observable must be 'p' or 'x', got {observable!r}")


def correlation_classical(kind: str, ctx: ModelContext, pgrid: PhaseGrid,
                          flow: FlowConfig, observable: str,
                          taus: np.ndarray) -> CorrelationSeries:
    """Mean-field (kind='mf') or ground-state (kind='gs') correlation function.

    kind='mf' weights initial conditions with Tr e^{-beta H} and drives the
    flow with lam_*; kind='gs' uses e^{-beta(p^2/2 + lam_0)} and lam_0.
    """
    _check_observable(observable)
    if kind not in ("mf", "gs"):
        raise ValueError(f"kind must be 'mf' or 'gs', got {kind!r}")
    x0, p0, w2, g0, g1, gp = _quadrature_nodes(ctx, pgrid)
    if kind == "mf":
        w = w2 * (g0 + g1) * gp
        which = "lambda_star"
    else:
        w = w2 * g0 * gp
        which = "lambda0"
    nums = _flow_numerators(ctx, which, x0, p0, flow.dt, taus, observable, [w])
    return CorrelationSeries(np.asarray(taus, dtype=float), nums[0] / w.sum(), kind)


def correlation_excited(ctx: ModelContext, pgrid: PhaseGrid, flow: FlowConfig,
                        observable: str, taus: np.ndarray) -> CorrelationSeries:
    """Excited-state correlation: one flow per eigenvalue, jointly normalized.

    T_es(tau) = sum_j int O(z_tau^j) O(z_0) e^{-beta(p^2/2 + lam_j)} dz_0
                / sum_k int e^{-beta(p^2/2 + lam_k)} dz.
    """
    _check_observable(observable)
    x0, p0, w2, g0, g1, gp = _quadrature_nodes(ctx, pgrid)
    w_j = (w2 * g0 * gp, w2 * g1 * gp)
    num = np.zeros(len(taus))
    for which, w in zip(("lambda0", "lambda1"), w_j):
        num += _flow_numerators(ctx, which, x0, p0, flow.dt, taus, observable, [w])[0]
    den = w_j[0].sum() + w_j[1].sum()
    return CorrelationSeries(np.asarray(taus, dtype=float), num / den, "es")
