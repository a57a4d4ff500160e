"""
Dirac Core Use Case
Gamma algebra and the lattice Dirac operator 𝒟 = π̸/m − 1 and Hamiltonian H.

All operators act on row-major (t, x, spin) vectors and are assembled as
scipy.sparse matrices, so adjoints needed by the action gradient are exact.
Identity used throughout: m·γ⁰·𝒟ψ = i∂ₜψ − Hψ, evaluated between slices:

    m·γ⁰·(𝒟ψ)_{k+½} = i(ψ_{k+1} − ψ_k)/dt − ½(H_k + H_{k+1})·½(ψ_k + ψ_{k+1})

so a Crank–Nicolson step of i∂ₜψ = Hψ is annihilated exactly.
"""

from typing import Dict, Tuple

import numpy as np
import scipy.sparse as sp

from ..entities.dirac import GammaSet, MassParameter, Potential
from ..entities.errors import GridError, StencilError
from ..entities.grid import (SPINOR_COMPONENTS, SpacetimeGrid, SpinorField, SpinorSlice,
                             XBoundary)
from shared.utils.logger import get_logger

dirac_logger = get_logger("dirac")

_SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

MIN_STENCIL_SITES = 3


def build_gamma_set() -> GammaSet:
    """Dirac representation: γ⁰ = diag(I, −I), γⁱ = [[0, σⁱ], [−σⁱ, 0]]."""
    identity = np.eye(2, dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    gamma0 = np.block([[identity, zero], [zero, -identity]])
    spatial = [np.block([[zero, s], [-s, zero]]) for s in _SIGMA]
    return GammaSet(gamma0, *spatial)


GAMMAS = build_gamma_set()


def time_reversal_matrix() -> np.ndarray:
    """U = iγ¹γ³; time reversal acts as ψ(t) → U·ψ*(−t)."""
    return 1j * GAMMAS.gamma1 @ GAMMAS.gamma3


def forward_difference_matrix(n: int, h: float) -> sp.csr_matrix:
    """(n−1)×n: (f_{k+1} − f_k)/h at the midpoints."""
    if n < 2:
        raise StencilError(f"time axis needs at least 2 slices, got {n}")
    return sp.diags([np.full(n - 1, -1.0 / h), np.full(n - 1, 1.0 / h)], [0, 1],
                    shape=(n - 1, n), format="csr")


def midpoint_average_matrix(n: int) -> sp.csr_matrix:
    """(n−1)×n: (f_k + f_{k+1})/2 at the midpoints."""
    if n < 2:
        raise StencilError(f"time axis needs at least 2 slices, got {n}")
    return sp.diags([np.full(n - 1, 0.5), np.full(n - 1, 0.5)], [0, 1],
                    shape=(n - 1, n), format="csr")


def time_derivative_matrix(n: int, h: float) -> sp.csr_matrix:
    """Site-centred d/dt for local momenta: centered inside, one-sided on the end slices."""
    if n < MIN_STENCIL_SITES:
        raise StencilError(f"time axis needs at least {MIN_STENCIL_SITES} slices, got {n}")
    main = np.zeros(n)
    main[0], main[-1] = -1.0 / h, 1.0 / h
    upper = np.full(n - 1, 0.5 / h)
    lower = np.full(n - 1, -0.5 / h)
    upper[0] = 1.0 / h
    lower[-1] = -1.0 / h
    return sp.diags([lower, main, upper], [-1, 0, 1], format="csr")


def space_derivative_matrix(n: int, h: float, boundary: XBoundary) -> sp.csr_matrix:
    """d/dx; an axis with a single site is inactive and differentiates to zero."""
    if n == 1:
        return sp.csr_matrix((1, 1))
    if n < MIN_STENCIL_SITES:
        raise StencilError(f"space axis needs at least {MIN_STENCIL_SITES} sites, got {n}")
    if boundary is XBoundary.OPEN:
        return time_derivative_matrix(n, h)
    half = 0.5 / h
    matrix = sp.diags([np.full(n - 1, -half), np.full(n - 1, half)], [-1, 1], format="lil")
    matrix[0, n - 1] = -half
    matrix[n - 1, 0] = half
    return matrix.tocsr()


def _coupling_blocks(charge: float, potential_rows: np.ndarray) -> sp.csr_matrix:
    """eA⁰ − Σᵢ eAⁱγ⁰γⁱ as a block-diagonal operator; potential_rows shape (4, n_sites)."""
    n_sites = potential_rows.shape[1]
    total = sp.kron(sp.diags(charge * potential_rows[0]), sp.identity(SPINOR_COMPONENTS))
    for i in (1, 2, 3):
        if np.any(potential_rows[i]):
            total = total - sp.kron(sp.diags(charge * potential_rows[i]),
                                    sp.csr_matrix(GAMMAS.alpha(i)))
    return sp.csr_matrix(total, shape=(n_sites * SPINOR_COMPONENTS,) * 2)


def free_slice_hamiltonian(grid: SpacetimeGrid, mass: MassParameter) -> sp.csr_matrix:
    """γ⁰(γ¹·(−i∂ₓ) + m) on one slice."""
    dx_matrix = space_derivative_matrix(grid.n_x, grid.dx, grid.x_boundary)
    kinetic = sp.kron(-1j * dx_matrix, sp.csr_matrix(GAMMAS.alpha(1)))
    rest = mass.m * sp.kron(sp.identity(grid.n_x), sp.csr_matrix(GAMMAS.gamma0))
    return sp.csr_matrix(kinetic + rest)


def slice_hamiltonian_matrix(potential: Potential, mass: MassParameter, t_index: int) -> sp.csr_matrix:
    """H = γ⁰(γ⃗·π⃗ + m) + eA⁰ at one time slice."""
    coupling = _coupling_blocks(potential.charge, potential.slice(t_index))
    return sp.csr_matrix(free_slice_hamiltonian(potential.grid, mass) + coupling)


def hamiltonian_matrix(potential: Potential, mass: MassParameter) -> sp.csr_matrix:
    """Block-diagonal H over every slice of the grid."""
    grid = potential.grid
    free = sp.kron(sp.identity(grid.n_t), free_slice_hamiltonian(grid, mass))
    coupling = _coupling_blocks(potential.charge,
                                potential.components.reshape(4, grid.n_sites))
    return sp.csr_matrix(free + coupling)


def momentum_matrices(grid: SpacetimeGrid) -> Tuple[sp.csr_matrix, sp.csr_matrix]:
    """(i∂ₜ, −i∂ₓ) on the full (t, x, spin) vector."""
    spin = sp.identity(SPINOR_COMPONENTS)
    dt_matrix = time_derivative_matrix(grid.n_t, grid.dt)
    dx_matrix = space_derivative_matrix(grid.n_x, grid.dx, grid.x_boundary)
    energy = sp.kron(sp.kron(1j * dt_matrix, sp.identity(grid.n_x)), spin)
    momentum = sp.kron(sp.kron(sp.identity(grid.n_t), -1j * dx_matrix), spin)
    return sp.csr_matrix(energy), sp.csr_matrix(momentum)


class DiracOperator:
    """The lattice operator 𝒟 for a fixed potential and mass.

    Maps a field on n_t slices to its residual on the n_t − 1 midpoints.
    """

    def __init__(self, potential: Potential, mass: MassParameter):
        self.potential = potential
        self.mass = mass
        self.grid = potential.grid
        self._matrix = None

    @property
    def residual_grid(self) -> SpacetimeGrid:
        return self.grid.midpoints()

    @property
    def matrix(self) -> sp.csr_matrix:
        if self._matrix is None:
            grid = self.grid
            if grid.n_t < 2:
                raise StencilError(f"time axis needs at least 2 slices, got {grid.n_t}")
            slice_size = grid.n_x * SPINOR_COMPONENTS
            forward = sp.kron(forward_difference_matrix(grid.n_t, grid.dt), sp.identity(slice_size))
            average = sp.kron(midpoint_average_matrix(grid.n_t), sp.identity(slice_size))
            slices = [slice_hamiltonian_matrix(self.potential, self.mass, k) for k in range(grid.n_t)]
            midpoint = sp.block_diag([0.5 * (slices[k] + slices[k + 1])
                                      for k in range(grid.n_t - 1)], format="csr")
            beta = sp.kron(sp.identity((grid.n_t - 1) * grid.n_x), sp.csr_matrix(GAMMAS.gamma0))
            residual = 1j * forward - midpoint @ average
            self._matrix = sp.csr_matrix(beta @ residual) / self.mass.m
            dirac_logger.debug("Assembled Dirac operator", shape=self._matrix.shape,
                               nnz=self._matrix.nnz)
        return self._matrix

    def apply_flat(self, vector: np.ndarray) -> np.ndarray:
        return self.matrix @ vector

    def apply(self, field: SpinorField) -> SpinorField:
        if field.grid != self.grid:
            raise GridError("field and potential live on different grids")
        grid = self.residual_grid
        return SpinorField(grid, self.apply_flat(field.flat()).reshape(grid.shape))


def apply_dirac(field: SpinorField, pot: Potential, m: MassParameter) -> SpinorField:
    """(π̸/m − 1)ψ at the midpoints between consecutive slices."""
    return DiracOperator(pot, m).apply(field)


def apply_hamiltonian(slice_: SpinorSlice, pot: Potential, m: MassParameter) -> SpinorSlice:
    """Hψ on one slice."""
    if slice_.grid.n_x != pot.grid.n_x or slice_.grid.dx != pot.grid.dx:
        raise GridError("slice and potential live on different grids")
    hamiltonian = slice_hamiltonian_matrix(pot, m, slice_.t_index)
    return slice_.with_values((hamiltonian @ slice_.values.reshape(-1)).reshape(slice_.values.shape))


def time_reverse(field: SpinorField) -> SpinorField:
    """ψ'(t_k) = U·ψ*(t_{n−1−k}) with U = iγ¹γ³."""
    u = time_reversal_matrix()
    mirrored = np.conj(field.values[::-1])
    return field.with_values(np.einsum("ab,txb->txa", u, mirrored))


def discretization_metadata(grid: SpacetimeGrid) -> Dict[str, str]:
    """Scheme description recorded with every output."""
    return {
        "time_derivative": "midpoint (Crank-Nicolson) residual between consecutive slices",
        "local_momentum": "centered second order inside, one-sided first order on end slices",
        "space_derivative": ("inactive" if not grid.x_active else
                             f"centered second order, {grid.x_boundary.value} boundary"),
        "quadrature": "riemann sum with dt*dx weights",
        "gamma_representation": "dirac",
        "two_particle": "independent per-particle time axes"
    }
