"""
Two-Particle Field Entity
Tensor-product spinor amplitude over independent per-particle (t, x) lattices.
"""

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from .errors import FieldError, GridError
from .grid import SPINOR_COMPONENTS, SpacetimeGrid, SpinorField

PAIR_COMPONENTS = SPINOR_COMPONENTS * SPINOR_COMPONENTS

EQUAL_TIME_NOTE = ("configurations restricted to t_a = t_b on one shared time axis; "
                   "amplitudes with t_a != t_b are dropped")


@dataclass
class EqualTimeField:
    """Equal-time reduction ψ(t, x_a, x_b), values shape (n_t, n_x_a, n_x_b, 16)."""
    grid_a: SpacetimeGrid
    grid_b: SpacetimeGrid
    values: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.grid_a.times

    def metadata(self) -> Dict[str, Any]:
        return {
            "representation": "equal-time",
            "reduced_from": "independent-times",
            "time_axis": "shared",
            "note": EQUAL_TIME_NOTE,
            "component_order": "4*s_a + s_b",
            "grid_a": self.grid_a.to_dict(),
            "grid_b": self.grid_b.to_dict()
        }


@dataclass
class TwoParticleField:
    """Amplitude ψ(t_a, x_a, t_b, x_b) with 16 components indexed 4·s_a + s_b.

    values has shape (n_t_a, n_x_a, n_t_b, n_x_b, 16). Each particle keeps its
    own time coordinate; equal-time configurations are available through
    equal_time_slice.
    """
    grid_a: SpacetimeGrid
    grid_b: SpacetimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        expected = (self.grid_a.n_t, self.grid_a.n_x, self.grid_b.n_t, self.grid_b.n_x,
                    PAIR_COMPONENTS)
        if self.values.shape != expected:
            raise GridError(f"two-particle shape {self.values.shape} does not match {expected}")
        if not np.all(np.isfinite(self.values)):
            raise FieldError("non-finite values in two-particle field")

    @property
    def dims(self):
        return (int(np.prod(self.grid_a.shape)), int(np.prod(self.grid_b.shape)))

    @classmethod
    def product(cls, psi_a: SpinorField, psi_b: SpinorField) -> 'TwoParticleField':
        """ψ_a ⊗ ψ_b."""
        matrix = np.outer(psi_a.flat(), psi_b.flat())
        return cls.from_matrix(psi_a.grid, psi_b.grid, matrix)

    @classmethod
    def from_matrix(cls, grid_a: SpacetimeGrid, grid_b: SpacetimeGrid,
                    matrix: np.ndarray) -> 'TwoParticleField':
        """Inverse of as_matrix."""
        nta, nxa, _ = grid_a.shape
        ntb, nxb, _ = grid_b.shape
        blocks = np.asarray(matrix).reshape(nta, nxa, SPINOR_COMPONENTS, ntb, nxb, SPINOR_COMPONENTS)
        values = blocks.transpose(0, 1, 3, 4, 2, 5).reshape(nta, nxa, ntb, nxb, PAIR_COMPONENTS)
        return cls(grid_a, grid_b, values)

    def as_matrix(self) -> np.ndarray:
        """Rows index (t_a, x_a, s_a), columns (t_b, x_b, s_b)."""
        nta, nxa, ntb, nxb, _ = self.values.shape
        blocks = self.values.reshape(nta, nxa, ntb, nxb, SPINOR_COMPONENTS, SPINOR_COMPONENTS)
        return blocks.transpose(0, 1, 4, 2, 3, 5).reshape(self.dims)

    def equal_time_slice(self) -> np.ndarray:
        """Configurations with t_a = t_b, shape (n_t, n_x_a, n_x_b, 16)."""
        if self.grid_a.n_t != self.grid_b.n_t or self.grid_a.dt != self.grid_b.dt:
            raise GridError("equal-time slice needs matching time axes")
        idx = np.arange(self.grid_a.n_t)
        return self.values[idx, :, idx, :, :]

    def equal_time_field(self) -> EqualTimeField:
        """equal_time_slice with metadata recording the reduction."""
        return EqualTimeField(self.grid_a, self.grid_b, self.equal_time_slice())

    def norm(self) -> float:
        volume = self.grid_a.cell_volume * self.grid_b.cell_volume
        return float(np.vdot(self.values, self.values).real * volume)

    def metadata(self) -> Dict[str, Any]:
        return {
            "representation": "independent-times",
            "equal_time_reduction": EQUAL_TIME_NOTE,
            "component_order": "4*s_a + s_b",
            "grid_a": self.grid_a.to_dict(),
            "grid_b": self.grid_b.to_dict()
        }
