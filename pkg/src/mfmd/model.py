"""Two-electronic-state model potential and its mean-field reduction.

The electronic potential is the real symmetric 2x2 matrix

    V(x) = (1/4)(x - 1/2)^4 I + c [[x, delta], [delta, -x]]

with closed-form eigenvalues

    lam_{0,1}(x) = (1/4)(x - 1/2)^4 -/+ |c| s(x),   s(x) = sqrt(x^2 + delta^2),

so lam_0 <= lam_1 for any sign of c.  The Gibbs average of the two
eigenvalues at inverse temperature beta defines the mean-field potential

    lam_*(x) = (lam_0 e^{-beta lam_0} + lam_1 e^{-beta lam_1}) /
               (e^{-beta lam_0} + e^{-beta lam_1})
             = q(x) - |c| s(x) tanh(beta |c| s(x)),

evaluated in the shifted tanh form so it is overflow-safe for any beta and
collapses to lam_0 exactly when the eigenvalues coincide (c = 0).

All functions are pure, accept scalars or numpy arrays in ``x``, and return
matching shapes.  Matrix-valued results have trailing shape (2, 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainTooSmall, SingularGradient
from .grids import SpatialGrid
from .quadrature import composite_simpson

#: Eigenvalue gap below which the eigenvector matrix falls back to identity.
DEGENERACY_TOL = 1e-12

#: Relative Gibbs weight that must be reached at quadrature endpoints.
BOUNDARY_DECAY_TOL = 1e-12


@dataclass(frozen=True)
class PotentialParams:
    """Coupling strength c and gap parameter delta of the matrix potential."""

    c: float
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")


@dataclass(frozen=True)
class ModelContext:
    """Potential parameters plus inverse temperature and nucleus/electron mass ratio."""

    params: PotentialParams
    beta: float
    mass_ratio: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.mass_ratio <= 0:
            raise ValueError(f"mass_ratio must be > 0, got {self.mass_ratio}")


def quartic(x):
    """Scalar part (1/4)(x - 1/2)^4 shared by both eigenvalues."""
    x = np.asarray(x, dtype=float)
    return 0.25 * (x - 0.5) ** 4


def quartic_gradient(x):
    x = np.asarray(x, dtype=float)
    return (x - 0.5) ** 3


def eval_potential(x, params: PotentialParams) -> np.ndarray:
    """Matrix potential V(x); shape (..., 2, 2), exactly symmetric."""
    x = np.asarray(x, dtype=float)
    q = quartic(x)
    v = np.empty(x.shape + (2, 2))
    v[..., 0, 0] = q + params.c * x
    v[..., 1, 1] = q - params.c * x
    v[..., 0, 1] = params.c * params.delta
    v[..., 1, 0] = params.c * params.delta
    return v


def eigenvalues(x, params: PotentialParams):
    """Sorted eigenvalues (lam_0, lam_1) of V(x)."""
    x = np.asarray(x, dtype=float)
    q = quartic(x)
    gap_half = abs(params.c) * np.hypot(x, params.delta)
    return q - gap_half, q + gap_half


def eigenvalue_gradients(x, params: PotentialParams):
    """d lam_{0,1}/dx; raises SingularGradient at the conical point delta = 0, x = 0."""
    x = np.asarray(x, dtype=float)
    if params.c != 0.0 and params.delta == 0.0 and np.any(x == 0.0):
        raise SingularGradient("eigenvalues are not differentiable at x = 0 when delta = 0")
    dq = quartic_gradient(x)
    if params.c == 0.0:
        return dq.copy(), dq.copy()
    ds = abs(params.c) * x / np.hypot(x, params.delta)
    return dq - ds, dq + ds


def eigenvector_matrix(x: float, params: PotentialParams,
                       tol_degeneracy: float = DEGENERACY_TOL) -> np.ndarray:
    """Orthogonal matrix whose columns are eigenvectors of V(x), ascending order.

    Column signs are fixed so the first nonzero component of each column is
    positive, which makes the matrix continuous in x for delta > 0.  Falls
    back to the identity when the eigenvalue gap is below `tol_degeneracy`.
    """
    x = float(x)
    c, delta = params.c, params.delta
    s = float(np.hypot(x, delta))
    if 2.0 * abs(c) * s < tol_degeneracy:
        return np.eye(2)
    # Eigenvectors of S = [[x, delta], [delta, -x]]: (delta, -(x+s)) for -s and
    # (x+s, delta) for +s.  For x < 0 the equivalent forms with s - x avoid the
    # cancellation in x + s.
    if x >= 0.0:
        u_minus = np.array([delta, -(x + s)])
        u_plus = np.array([x + s, delta])
    else:
        u_minus = np.array([s - x, -delta])
        u_plus = np.array([delta, s - x])
    u_minus /= np.linalg.norm(u_minus)
    u_plus /= np.linalg.norm(u_plus)
    if c > 0:
        cols = [u_minus, u_plus]
    else:
        cols = [u_plus, u_minus]
    psi = np.column_stack(cols)
    for j in range(2):
        lead = psi[0, j] if psi[0, j] != 0.0 else psi[1, j]
        if lead < 0.0:
            psi[:, j] = -psi[:, j]
    return psi


def mean_field_potential(x, ctx: ModelContext):
    """Gibbs-averaged eigenvalue lam_*(x) = q - |c| s tanh(beta |c| s)."""
    x = np.asarray(x, dtype=float)
    gap_half = abs(ctx.params.c) * np.hypot(x, ctx.params.delta)
    return quartic(x) - gap_half * np.tanh(ctx.beta * gap_half)


def mean_field_gradient(x, ctx: ModelContext):
    """d lam_*/dx, differentiating the Gibbs average in its tanh form."""
    x = np.asarray(x, dtype=float)
    c, delta = ctx.params.c, ctx.params.delta
    if delta == 0.0 and ctx.params.c != 0.0 and np.any(x == 0.0):
        raise SingularGradient("mean-field gradient undefined at x = 0 when delta = 0")
    s = np.hypot(x, delta)
    ds = abs(c) * x / np.where(s == 0.0, 1.0, s)  # s == 0 only when c == 0 is allowed
    u = ctx.beta * abs(c) * s
    th = np.tanh(u)
    # sech^2 via 1 - tanh^2 stays finite for arbitrarily large u.
    return quartic_gradient(x) - ds * (th + u * (1.0 - th * th))


def gibbs_state_weights(x, ctx: ModelContext):
    """Per-state Gibbs weights (w_0, w_1), w_j = e^{-beta lam_j}/sum_k e^{-beta lam_k}."""
    x = np.asarray(x, dtype=float)
    gap = 2.0 * abs(ctx.params.c) * np.hypot(x, ctx.params.delta)
    w1 = 1.0 / (1.0 + np.exp(ctx.beta * gap))
    return 1.0 - w1, w1


def state_probabilities(ctx: ModelContext, grid: SpatialGrid):
    """Canonical probabilities (q_0, q_1) of the two electronic states.

    q_j is the Gibbs x-integral of e^{-beta lam_j}, jointly normalized, by
    composite Simpson on `grid`.  Raises DomainTooSmall unless the relative
    weights e^{-beta (lam_j - min lam_0)} fall below 1e-12 at both endpoints.
    """
    xs = grid.nodes
    lam0, lam1 = eigenvalues(xs, ctx.params)
    shift = lam0.min()
    g0 = np.exp(-ctx.beta * (lam0 - shift))
    g1 = np.exp(-ctx.beta * (lam1 - shift))
    edge = max(g0[0], g0[-1], g1[0], g1[-1])
    if edge > BOUNDARY_DECAY_TOL:
        raise DomainTooSmall(
            f"Gibbs weight at grid endpoints is {edge:.3e} (needs <= {BOUNDARY_DECAY_TOL:g}); "
            "widen the spatial grid")
    i0 = composite_simpson(g0, grid.dx)
    i1 = composite_simpson(g1, grid.dx)
    q1 = i1 / (i0 + i1)
    return 1.0 - q1, q1
