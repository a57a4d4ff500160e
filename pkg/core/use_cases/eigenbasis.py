"""
Eigenbasis Use Case
Instantaneous eigenmodes of H(τ), their continuity tracking, the phase-evolved
basis and coefficient extraction.
"""

from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import eigh, orthogonal_procrustes
from scipy.optimize import linear_sum_assignment

from ..entities.dirac import MassParameter, Potential
from ..entities.errors import GridError
from ..entities.grid import SpacetimeGrid, SpinorField, SpinorSlice
from ..entities.modes import CoefficientTrack, InstantaneousModes, ModeBasis, PhasedBasis
from .dirac_core import slice_hamiltonian_matrix
from infrastructure.config.settings import settings
from shared.utils.logger import get_logger

eigen_logger = get_logger("eigenbasis")


def _dense(hamiltonian) -> np.ndarray:
    return hamiltonian.toarray() if sp.issparse(hamiltonian) else np.asarray(hamiltonian, dtype=complex)


def _degenerate_clusters(energies: np.ndarray, tol: float) -> List[np.ndarray]:
    """Index groups of (sorted) eigenvalues closer than tol."""
    clusters, start = [], 0
    for k in range(1, len(energies) + 1):
        if k == len(energies) or energies[k] - energies[k - 1] > tol * max(1.0, abs(energies[k])):
            clusters.append(np.arange(start, k))
            start = k
    return clusters


def _fix_initial_gauge(vectors: np.ndarray) -> np.ndarray:
    """Rotate each mode so its largest component is real positive."""
    fixed = vectors.copy()
    for j, row in enumerate(vectors):
        pivot = row[np.argmax(np.abs(row))]
        fixed[j] = row * (np.conj(pivot) / abs(pivot))
    return fixed


def solve_instantaneous(hamiltonian, dx: float,
                        previous: Optional[InstantaneousModes] = None,
                        degeneracy_tol: Optional[float] = None,
                        crossing_threshold: Optional[float] = None) -> InstantaneousModes:
    """
    Diagonalize one slice Hamiltonian and match modes to the previous slice.

    Args:
        hamiltonian: Hermitian slice H (sparse or dense), size 4·n_x
        dx: Spatial spacing; modes are normalized so Σ|χ|²dx = 1
        previous: Modes of the previous slice; None orders by energy
        degeneracy_tol: Relative gap below which eigenvalues form one cluster
        crossing_threshold: Minimum matched overlap before the slice is flagged

    Returns:
        InstantaneousModes in continuity order with ⟨χ_prev|χ⟩ real positive
    """
    degeneracy_tol = settings.numerics.degeneracy_tol if degeneracy_tol is None else degeneracy_tol
    crossing_threshold = (settings.numerics.crossing_threshold
                          if crossing_threshold is None else crossing_threshold)
    matrix = _dense(hamiltonian)
    scale = max(np.max(np.abs(matrix)), 1.0)
    if np.max(np.abs(matrix - matrix.conj().T)) > 1e-10 * scale:
        raise GridError("slice Hamiltonian is not Hermitian (open boundaries are not supported here)")

    energies, columns = eigh(matrix)
    n_x = matrix.shape[0] // 4
    vectors = columns.T / np.sqrt(dx)

    if previous is None:
        vectors = _fix_initial_gauge(vectors)
        return InstantaneousModes(energies, vectors.reshape(-1, n_x, 4), np.ones(len(energies)))

    prev = previous.modes.reshape(len(previous.energies), -1)
    overlap = (prev.conj() @ vectors.T) * dx
    for cluster in _degenerate_clusters(energies, degeneracy_tol):
        if cluster.size < 2:
            continue
        weight = np.sum(np.abs(overlap[:, cluster]) ** 2, axis=1)
        targets = np.sort(np.argsort(-weight, kind="stable")[:cluster.size])
        rotation, _ = orthogonal_procrustes(vectors[cluster].T, prev[targets].T)
        vectors[cluster] = (vectors[cluster].T @ rotation).T
    overlap = (prev.conj() @ vectors.T) * dx

    rows, cols = linear_sum_assignment(-np.abs(overlap) ** 2)
    vectors = vectors[cols]
    matched = overlap[rows, cols]
    magnitudes = np.abs(matched)
    phases = np.where(magnitudes > 0, np.conj(matched) / np.where(magnitudes > 0, magnitudes, 1.0), 1.0)
    vectors = vectors * phases[:, None]
    tracked = np.real(np.einsum("ja,ab,jb->j", vectors.conj(), matrix, vectors)) * dx
    flagged = bool(np.min(magnitudes) < crossing_threshold)
    return InstantaneousModes(tracked, vectors.reshape(-1, n_x, 4), magnitudes, flagged)


def build_mode_basis(potential: Potential, mass: MassParameter, t_i: float = 0.0,
                     top_k: Optional[int] = None,
                     initial_slice: Optional[SpinorSlice] = None) -> ModeBasis:
    """
    Track eigenmodes over every slice of the potential's grid.

    Args:
        potential: Four-potential sampled on the lab grid
        mass: Particle mass
        t_i: Hidden start time; τ = t − t_i
        top_k: Keep only the K modes with the largest initial overlap
        initial_slice: Slice used to rank modes for top_k

    Returns:
        ModeBasis with continuity-ordered modes
    """
    grid = potential.grid
    current = None
    energies, modes, overlaps, flagged = [], [], [], []
    for k in range(grid.n_t):
        current = solve_instantaneous(slice_hamiltonian_matrix(potential, mass, k), grid.dx, current)
        if current.flagged:
            flagged.append(k)
        energies.append(current.energies)
        modes.append(current.modes)
        overlaps.append(current.overlaps)
    if flagged:
        eigen_logger.warning("Possible eigenvalue crossings", slices=flagged)

    basis = ModeBasis(grid, grid.times - t_i, np.array(energies), np.array(modes),
                      np.array(overlaps), flagged)
    if top_k is not None:
        if initial_slice is None:
            raise GridError("top_k selection needs the initial slice")
        basis = select_top_modes(basis, initial_slice, top_k)
    return basis


def select_top_modes(basis: ModeBasis, initial_slice: SpinorSlice, top_k: int) -> ModeBasis:
    """Keep the top_k modes with the largest |⟨χ_j|ψ(t_0)⟩|², in continuity order."""
    if top_k >= basis.retained_count:
        return basis
    weights = np.abs(np.einsum("jxs,xs->j", basis.modes[0].conj(), initial_slice.values)) ** 2
    keep = np.sort(np.argsort(-weights, kind="stable")[:top_k])
    eigen_logger.info("Retaining modes by initial overlap", kept=int(top_k),
                      total=basis.retained_count)
    return basis.select(keep)


def build_phased_basis(basis: ModeBasis, t_i: float) -> PhasedBasis:
    """
    Attach phases Φ_j(t) = ∫₀ᵗ E_j(t′ − t_i)dt′.

    The integral from the first slice onwards is a trapezoid over the slices;
    before the first slice the energy is continued linearly from the first two
    slices, which is exact for constant and ramped energies.
    """
    lab_times = basis.taus + t_i
    energies = basis.energies
    t0 = lab_times[0]
    slope = ((energies[1] - energies[0]) / (lab_times[1] - lab_times[0])
             if basis.n_slices > 1 else np.zeros(basis.retained_count))
    lead_in = energies[0] * t0 - 0.5 * slope * t0 ** 2
    if basis.n_slices > 1:
        accumulated = cumulative_trapezoid(energies, lab_times, axis=0, initial=0.0)
    else:
        accumulated = np.zeros_like(energies)
    return PhasedBasis(basis, t_i, lab_times, lead_in[None, :] + accumulated)


def compose_field(coefficients: np.ndarray, phased: PhasedBasis, grid: SpacetimeGrid) -> SpinorField:
    """ψ = Σ_j C_j(t)ψ_j(t) for coefficients of shape (n_slices, n_modes)."""
    values = np.stack([np.einsum("j,jxs->xs", coefficients[k], phased.mode_values(k))
                       for k in range(phased.basis.n_slices)])
    return SpinorField(grid, values)


def project_coefficients(psi: SpinorField, phased: PhasedBasis,
                         completeness_tol: Optional[float] = None) -> CoefficientTrack:
    """C_j(t) = ⟨ψ_j(t)|ψ(t)⟩ with the completeness residual per slice."""
    completeness_tol = (settings.numerics.completeness_tol
                        if completeness_tol is None else completeness_tol)
    basis = phased.basis
    if psi.grid.n_t != basis.n_slices or psi.grid.n_x != basis.grid.n_x:
        raise GridError("field and basis have different shapes")
    dx = psi.grid.dx
    coefficients = np.empty((basis.n_slices, basis.retained_count), dtype=complex)
    residuals = np.empty(basis.n_slices)
    for k in range(basis.n_slices):
        modes = phased.mode_values(k)
        coefficients[k] = np.einsum("jxs,xs->j", modes.conj(), psi.values[k]) * dx
        remainder = psi.values[k] - np.einsum("j,jxs->xs", coefficients[k], modes)
        residuals[k] = np.sqrt(np.vdot(remainder, remainder).real * dx)
    worst = float(np.max(residuals))
    scale = np.sqrt(np.max(np.sum(np.abs(psi.values) ** 2, axis=(1, 2))) * dx)
    if worst > completeness_tol * max(scale, 1e-300):
        eigen_logger.warning("Projection residual above tolerance", residual=worst,
                             tolerance=completeness_tol)
    return CoefficientTrack(phased.lab_times, coefficients, residuals, psi.grid.dt)


def check_adiabaticity(basis: ModeBasis, mass: MassParameter) -> float:
    """max |⟨χ_k|∂_τχ_j⟩|/m over modes and slices, by forward differences."""
    if basis.n_slices < 2:
        raise GridError("adiabaticity needs at least two slices")
    dx = basis.grid.dx
    worst = 0.0
    for k in range(basis.n_slices - 1):
        step = basis.taus[k + 1] - basis.taus[k]
        derivative = (basis.modes[k + 1] - basis.modes[k]) / step
        coupling = np.einsum("kxs,jxs->kj", basis.modes[k].conj(), derivative) * dx
        worst = max(worst, float(np.max(np.abs(coupling))))
    value = worst / mass.m
    if value > settings.numerics.adiabatic_bound:
        eigen_logger.warning("Adiabaticity bound exceeded", value=value,
                             bound=settings.numerics.adiabatic_bound)
    return value
