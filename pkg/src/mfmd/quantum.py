"""Finite-difference reference quantum solver.

The Hamiltonian -1/(2M) d^2/dx^2 + V(x) is discretized with the fourth-order
five-point Laplacian stencil

    f''(x) ~ (-f(x-2h) + 16 f(x-h) - 30 f(x) + 16 f(x+h) - f(x+2h)) / (12 h^2)

on a uniform grid with homogeneous Dirichlet boundaries applied by plain
truncation.  For the 2x2 matrix potential the two electronic channels are
interleaved per node, giving a 2(K+1)-dimensional real symmetric matrix whose
node-diagonal blocks carry V(x_k); scalar potentials give dimension K+1.

Correlation functions are evaluated in the eigenbasis.  The momentum
observable is kept as its real antisymmetric generator A with P = iA, so all
trace arithmetic stays real.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ImaginaryResidueTooLarge, NonConvergence
from .grids import SpatialGrid
from .model import ModelContext, eval_potential
from .quadrature import composite_simpson
from .series import CorrelationSeries, DensityProfile

#: Laplacian stencil: channel-preserving coupling at node offsets 0, 1, 2.
_STENCIL = ((0, 30.0), (1, -16.0), (2, 1.0))

#: Relative Gibbs weight below which eigenstates are dropped from density sums.
GIBBS_WEIGHT_CUTOFF = 1e-14

#: Normalized density allowed at the domain endpoints before warning.
DENSITY_BOUNDARY_TOL = 1e-10

#: Normalized imaginary residue that marks a broken trace symmetrization.
IMAG_RESIDUE_TOL = 1e-8


@dataclass(frozen=True)
class DiscreteHamiltonian:
    """Dense real symmetric FD Hamiltonian with its grid metadata."""

    matrix: np.ndarray
    grid: SpatialGrid
    mass_ratio: float
    n_channels: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    grid: SpatialGrid
    mass_ratio: float
    n_channels: int


def _kinetic(dim: int, stride: int, prefactor: float) -> np.ndarray:
    h = np.zeros((dim, dim))
    for offset, coef in _STENCIL:
        val = coef * prefactor
        idx = np.arange(dim - stride * offset)
        h[idx, idx + stride * offset] += val
        if offset:
            h[idx + stride * offset, idx] += val
    return h


def build_hamiltonian(grid: SpatialGrid, ctx: ModelContext) -> DiscreteHamiltonian:
    """Assemble the 2(K+1)-dimensional FD Hamiltonian for the matrix potential."""
    n = grid.K + 1
    pref = 1.0 / (2.0 * ctx.mass_ratio * 12.0 * grid.dx**2)
    h = _kinetic(2 * n, 2, pref)
    v = eval_potential(grid.nodes, ctx.params)
    k = 2 * np.arange(n)
    h[k, k] += v[:, 0, 0]
    h[k + 1, k + 1] += v[:, 1, 1]
    h[k, k + 1] += v[:, 0, 1]
    h[k + 1, k] += v[:, 0, 1]
    return DiscreteHamiltonian(h, grid, ctx.mass_ratio, 2)


def build_scalar_hamiltonian(grid: SpatialGrid, ctx: ModelContext,
                             potential: Callable[[np.ndarray], np.ndarray]) -> DiscreteHamiltonian:
    """Assemble the (K+1)-dimensional FD Hamiltonian for a scalar potential."""
    n = grid.K + 1
    pref = 1.0 / (2.0 * ctx.mass_ratio * 12.0 * grid.dx**2)
    h = _kinetic(n, 1, pref)
    idx = np.arange(n)
    h[idx, idx] += np.asarray(potential(grid.nodes), dtype=float)
    return DiscreteHamiltonian(h, grid, ctx.mass_ratio, 1)


def eigendecompose(h: DiscreteHamiltonian) -> EigenSystem:
    """Full symmetric eigendecomposition (LAPACK), ascending eigenvalues."""
    try:
        evals, evecs = np.linalg.eigh(h.matrix)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(f"symmetric eigensolver failed: {exc}") from exc
    return EigenSystem(evals, evecs, h.grid, h.mass_ratio, h.n_channels)


def equilibrium_density(eig: EigenSystem, beta: float, grid: SpatialGrid) -> DensityProfile:
    """Quantum equilibrium position density from the FD eigenpairs.

    Sums |phi_n(x_k)|^2 over channels with Gibbs weights e^{-beta(e_n - e_0)},
    truncating states below relative weight 1e-14, then normalizes so the
    composite Simpson integral over the grid is 1.
    """
    w = np.exp(-beta * (eig.eigenvalues - eig.eigenvalues[0]))
    keep = w > GIBBS_WEIGHT_CUTOFF
    vecs = eig.eigenvectors[:, keep]
    dens = (vecs * vecs) @ w[keep]
    if eig.n_channels == 2:
        dens = dens[0::2] + dens[1::2]
    dens /= composite_simpson(dens, grid.dx)
    edge = max(dens[0], dens[-1])
    if edge > DENSITY_BOUNDARY_TOL:
        warnings.warn(
            f"equilibrium density at the domain endpoints is {edge:.3e}; "
            "the computational domain may be too small", stacklevel=2)
    return DensityProfile(grid, dens)


def observable_matrices(grid: SpatialGrid, h: DiscreteHamiltonian):
    """Position matrix X and the momentum generator A (P = iA).

    X is diagonal with the node position repeated per channel.  A is the real
    antisymmetric matrix sqrt(M) (H X - X H); the factor i is carried
    symbolically by the correlation formula so all arithmetic stays real.
    """
    x_diag = np.repeat(grid.nodes, h.n_channels)
    x_mat = np.diag(x_diag)
    a_mat = np.sqrt(h.mass_ratio) * (h.matrix * x_diag[None, :] - x_diag[:, None] * h.matrix)
    return x_mat, a_mat


def correlation_qm(eig: EigenSystem, observable: np.ndarray, beta: float,
                   mass_ratio: float, taus: np.ndarray, kind: str = "qm") -> CorrelationSeries:
    """Symmetrized quantum autocorrelation of an observable in the eigenbasis.

    `observable` is the real generator matrix: X itself for the position
    observable, A for momentum (P = iA).  Either way the eigenbasis trace
    reduces to

        S(tau) = sum_{m,n} cos(tau sqrt(M) (e_m - e_n)) O~_{mn}^2 (w_m + w_n)
                 / (2 sum_n w_n),

    with O~ = Q^T O Q and w_n = e^{-beta (e_n - e_0)}.  The sine part cancels
    by symmetry; its floating-point residue is asserted below 1e-8.
    """
    taus = np.asarray(taus, dtype=float)
    e = eig.eigenvalues
    o_tilde = eig.eigenvectors.T @ observable @ eig.eigenvectors
    w = np.exp(-beta * (e - e[0]))
    weight = (o_tilde * o_tilde) * (w[:, None] + w[None, :])
    z = 2.0 * w.sum()
    phases = np.exp(-1j * np.sqrt(mass_ratio) * np.outer(e, taus))
    g = weight @ phases
    traced = np.sum(np.conj(phases) * g, axis=0)
    residue = np.max(np.abs(traced.imag)) / z
    if residue > IMAG_RESIDUE_TOL:
        raise ImaginaryResidueTooLarge(
            f"imaginary residue {residue:.3e} exceeds {IMAG_RESIDUE_TOL:g}")
    return CorrelationSeries(taus, traced.real / z, kind)
