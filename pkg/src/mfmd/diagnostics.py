"""Error functionals, norms between computed observables, and convergence fits.

The variance functionals eps_1^2 and eps_2^2 bound the mean-field
approximation error t*eps_1^2 + t^2*eps_2^2.  After the Gaussian momentum
factors cancel between numerator and denominator they reduce to 1D integrals

    eps_1^2 = int sum_i (lam_i - lam_*)^2 e^{-beta lam_i} dx / int sum_i e^{-beta lam_i} dx
    eps_2^2 = int sum_i (lam_i' - lam_*')^2 e^{-beta lam_i} dx / int sum_i e^{-beta lam_i} dx

where the gradient form of eps_2^2 uses the eigenvector field as the
orthogonal transformation, so the matrix gradient collapses to the analytic
eigenvalue gradients.  gamma_lambda is the ground-state Gibbs average of the
eigenvalue gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, HorizonExceedsSeries, TooFewSamples
from .grids import SpatialGrid
from .model import (ModelContext, eigenvalue_gradients, eigenvalues,
                    mean_field_gradient, mean_field_potential, state_probabilities)
from .quadrature import composite_simpson
from .series import CorrelationSeries, DensityProfile


@dataclass(frozen=True)
class CaseReport:
    """Per-case summary row: parameters, excited-state probability, error functionals."""

    label: str
    beta: float
    c: float
    delta: float
    mass_ratio: float
    q1: float
    eps1_sq: float
    eps2_sq: float
    gamma_lambda: float


@dataclass(frozen=True)
class ConvergenceFit:
    """Log-log least-squares fit of errors against the mass ratio."""

    mass_ratios: np.ndarray
    errors: np.ndarray
    slope: float
    intercept: float


def _gibbs_factors(ctx: ModelContext, grid: SpatialGrid):
    xs = grid.nodes
    lam0, lam1 = eigenvalues(xs, ctx.params)
    shift = lam0.min()
    g0 = np.exp(-ctx.beta * (lam0 - shift))
    g1 = np.exp(-ctx.beta * (lam1 - shift))
    return xs, lam0, lam1, g0, g1


def epsilon1_sq(ctx: ModelContext, grid: SpatialGrid) -> float:
    """Gibbs variance of the eigenvalues around the mean-field potential."""
    xs, lam0, lam1, g0, g1 = _gibbs_factors(ctx, grid)
    lam_star = mean_field_potential(xs, ctx)
    num = (lam0 - lam_star) ** 2 * g0 + (lam1 - lam_star) ** 2 * g1
    den = g0 + g1
    return composite_simpson(num, grid.dx) / composite_simpson(den, grid.dx)


def epsilon2_sq(ctx: ModelContext, grid: SpatialGrid) -> float:
    """Gibbs variance of the eigenvalue gradients around the mean-field gradient."""
    xs, _, _, g0, g1 = _gibbs_factors(ctx, grid)
    dlam0, dlam1 = eigenvalue_gradients(xs, ctx.params)
    dstar = mean_field_gradient(xs, ctx)
    num = (dlam0 - dstar) ** 2 * g0 + (dlam1 - dstar) ** 2 * g1
    den = g0 + g1
    return composite_simpson(num, grid.dx) / composite_simpson(den, grid.dx)


def gamma_lambda(ctx: ModelContext, grid: SpatialGrid) -> float:
    """Ground-state Gibbs average of the eigenvalue gap |lam_1 - lam_0|."""
    _, lam0, lam1, g0, _ = _gibbs_factors(ctx, grid)
    return composite_simpson(np.abs(lam1 - lam0) * g0, grid.dx) / composite_simpson(g0, grid.dx)


def case_report(label: str, ctx: ModelContext, grid: SpatialGrid) -> CaseReport:
    """Assemble the per-case summary row (Table-1 style)."""
    _, q1 = state_probabilities(ctx, grid)
    return CaseReport(label, ctx.beta, ctx.params.c, ctx.params.delta, ctx.mass_ratio,
                      q1, epsilon1_sq(ctx, grid), epsilon2_sq(ctx, grid),
                      gamma_lambda(ctx, grid))


def sup_error(a: CorrelationSeries, b: CorrelationSeries, tau: float) -> float:
    """max_{tau' <= tau} |a(tau') - b(tau')| over the shared tau grid."""
    if a.tau_values.shape != b.tau_values.shape or np.any(a.tau_values != b.tau_values):
        raise GridMismatch("correlation series live on different tau grids")
    mask = a.tau_values <= tau + 1e-12
    if not mask.any():
        raise HorizonExceedsSeries("no samples at or below the requested horizon")
    return float(np.max(np.abs(a.values[mask] - b.values[mask])))


def running_sup_error(a: CorrelationSeries, b: CorrelationSeries) -> np.ndarray:
    """sup_{tau' <= tau} |a - b| evaluated at every tau of the shared grid."""
    if a.tau_values.shape != b.tau_values.shape or np.any(a.tau_values != b.tau_values):
        raise GridMismatch("correlation series live on different tau grids")
    return np.maximum.accumulate(np.abs(a.values - b.values))


def l1_density_error(a: DensityProfile, b: DensityProfile) -> float:
    """Composite Simpson integral of |a - b| over the shared spatial grid."""
    if a.grid != b.grid:
        raise GridMismatch("density profiles live on different spatial grids")
    return composite_simpson(np.abs(a.values - b.values), a.grid.dx)


def fit_loglog_slope(mass_ratios, errors) -> ConvergenceFit:
    """Ordinary least squares of log(error) against log(M)."""
    m = np.asarray(mass_ratios, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(m) < 3:
        raise TooFewSamples(f"need at least 3 samples for a slope fit, got {len(m)}")
    slope, intercept = np.polyfit(np.log(m), np.log(e), 1)
    return ConvergenceFit(m, e, float(slope), float(intercept))


def convergence_study(ctx: ModelContext, mass_ratios, grid: SpatialGrid) -> ConvergenceFit:
    """L1 error between quantum and mean-field densities across mass ratios.

    Runs one FD eigensolve per mass ratio on `grid` and fits the log-log
    slope of ||mu_qm - mu_mf||_L1 against M (expected close to -1).
    """
    from dataclasses import replace

    from .classical import density_mf
    from .quantum import build_hamiltonian, eigendecompose, equilibrium_density

    if len(list(mass_ratios)) < 3:
        raise TooFewSamples("need at least 3 mass ratios")
    mu_mf = density_mf(ctx, grid)
    errors = []
    for m in mass_ratios:
        ctx_m = replace(ctx, mass_ratio=float(m))
        eig = eigendecompose(build_hamiltonian(grid, ctx_m))
        mu_qm = equilibrium_density(eig, ctx.beta, grid)
        errors.append(l1_density_error(mu_qm, mu_mf))
    return fit_loglog_slope(mass_ratios, errors)


def solve_delta_for_q1(beta: float, c: float, q1_target: float, grid: SpatialGrid,
                       lo: float = 1e-4, hi: float = 6.0, tol: float = 1e-10) -> float:
    """Bisect the gap parameter so the excited-state probability hits q1_target.

    q1 decreases monotonically in delta at fixed (beta, c) for the published
    regimes; raises ValueError when the target is not bracketed.
    """
    from .model import PotentialParams

    def q1_of(delta):
        ctx = ModelContext(PotentialParams(c, delta), beta, 1.0)
        return state_probabilities(ctx, grid)[1]

    f_lo, f_hi = q1_of(lo) - q1_target, q1_of(hi) - q1_target
    if f_lo * f_hi > 0:
        raise ValueError(f"q1 target {q1_target} not bracketed on delta in [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (q1_of(mid) - q1_target) * f_lo > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def green_kubo(series: CorrelationSeries, horizon: float | None = None) -> float:
    """Composite Simpson integral of the correlation series over [0, horizon].

    Finite-horizon truncation of the Green-Kubo integral; the horizon defaults
    to the series extent and must not exceed it.
    """
    taus = series.tau_values
    if horizon is None:
        horizon = float(taus[-1])
    if horizon > taus[-1] + 1e-12:
        raise HorizonExceedsSeries(
            f"horizon {horizon} exceeds series extent {taus[-1]}")
    n = int(np.searchsorted(taus, horizon + 1e-12)) - 1
    if n < 1:
        return 0.0
    d_tau = taus[1] - taus[0]
    return composite_simpson(series.values[: n + 1], d_tau)
