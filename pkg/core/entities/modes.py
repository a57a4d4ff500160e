"""
Mode Basis Entities
Instantaneous eigenmodes, the phase-evolved basis and coefficient tracks.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from .grid import SpacetimeGrid, SpinorSlice


@dataclass
class InstantaneousModes:
    """Eigenpairs of H at one slice, ordered by continuity with the previous slice."""
    energies: np.ndarray          # (n_modes,)
    modes: np.ndarray             # (n_modes, n_x, 4), normalized with dx
    overlaps: np.ndarray          # |<χ_j(prev)|χ_j>| per mode, 1 on the first slice
    flagged: bool = False


@dataclass
class ModeBasis:
    """Tracked eigenmodes over all slices of a grid."""
    grid: SpacetimeGrid
    taus: np.ndarray              # (n_slices,)
    energies: np.ndarray          # (n_slices, n_modes)
    modes: np.ndarray             # (n_slices, n_modes, n_x, 4)
    overlaps: np.ndarray          # (n_slices, n_modes)
    flagged_slices: List[int] = field(default_factory=list)

    @property
    def retained_count(self) -> int:
        return self.energies.shape[1]

    @property
    def n_slices(self) -> int:
        return self.energies.shape[0]

    def mode_slice(self, t_index: int, j: int) -> SpinorSlice:
        return SpinorSlice(self.grid, self.modes[t_index, j], t_index)

    def select(self, indices: Sequence[int]) -> 'ModeBasis':
        """Restrict to a subset of modes, keeping their order."""
        idx = np.asarray(indices, dtype=int)
        return ModeBasis(self.grid, self.taus, self.energies[:, idx], self.modes[:, idx],
                         self.overlaps[:, idx], list(self.flagged_slices))

    def to_rows(self) -> List[Dict[str, Any]]:
        """Mode table rows for export."""
        rows = []
        for k in range(self.n_slices):
            for j in range(self.retained_count):
                rows.append({
                    "slice": k,
                    "tau": float(self.taus[k]),
                    "mode": j,
                    "energy": float(self.energies[k, j]),
                    "overlap": float(self.overlaps[k, j]),
                    "flagged": k in self.flagged_slices
                })
        return rows


@dataclass
class PhasedBasis:
    """Dirac basis ψ_j(t, x; t_i) = χ_j(t − t_i, x)·exp(−iΦ_j(t))."""
    basis: ModeBasis
    t_i: float
    lab_times: np.ndarray         # (n_slices,)
    phases: np.ndarray            # Φ_j(t_k), (n_slices, n_modes)

    @property
    def retained_count(self) -> int:
        return self.basis.retained_count

    def mode_values(self, t_index: int) -> np.ndarray:
        """All ψ_j at one slice, shape (n_modes, n_x, 4)."""
        rotation = np.exp(-1j * self.phases[t_index])
        return self.basis.modes[t_index] * rotation[:, None, None]


@dataclass
class CoefficientTrack:
    """Expansion coefficients C_j(t; t_i) of a field in a phased basis."""
    times: np.ndarray             # (n_slices,)
    coefficients: np.ndarray      # (n_slices, n_modes) complex
    residuals: np.ndarray         # (n_slices,) completeness residual norms
    dt: float

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    @property
    def totals(self) -> np.ndarray:
        return np.sum(self.populations, axis=1)

    @property
    def initial_weights(self) -> np.ndarray:
        """Y_j = |C_j(t_i; t_i)|²."""
        return self.populations[0]
