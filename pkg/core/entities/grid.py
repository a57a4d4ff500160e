"""
Spacetime Grid Entities
The bounded lattice over (t, x) and the spinor fields that live on it.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict

import numpy as np

from .errors import FieldError, GridError

SPINOR_COMPONENTS = 4


class XBoundary(Enum):
    """Spatial boundary condition of the lattice."""
    PERIODIC = "periodic"
    OPEN = "open"


@dataclass(frozen=True)
class SpacetimeGrid:
    """Uniform lattice over the experiment region, natural units (1/m)."""
    n_t: int
    n_x: int
    dt: float
    dx: float
    origin_t: float = 0.0
    origin_x: float = 0.0
    x_boundary: XBoundary = XBoundary.PERIODIC

    def __post_init__(self):
        if self.n_t < 1 or self.n_x < 1:
            raise GridError(f"grid needs positive site counts, got n_t={self.n_t}, n_x={self.n_x}")
        if not (self.dt > 0 and self.dx > 0):
            raise GridError(f"grid spacings must be positive, got dt={self.dt}, dx={self.dx}")

    @property
    def shape(self):
        return (self.n_t, self.n_x, SPINOR_COMPONENTS)

    @property
    def times(self) -> np.ndarray:
        return self.origin_t + self.dt * np.arange(self.n_t)

    @property
    def positions(self) -> np.ndarray:
        return self.origin_x + self.dx * np.arange(self.n_x)

    @property
    def duration(self) -> float:
        return self.n_t * self.dt

    @property
    def length(self) -> float:
        return self.n_x * self.dx

    @property
    def n_sites(self) -> int:
        return self.n_t * self.n_x

    @property
    def x_active(self) -> bool:
        """A single spatial site means derivatives along x vanish."""
        return self.n_x > 1

    @property
    def cell_volume(self) -> float:
        return self.dt * self.dx

    def resolves_frequency(self, e_max: float) -> bool:
        """True when dt resolves phases rotating at angular frequency up to 2*e_max."""
        return self.dt < np.pi / (2.0 * e_max)

    def midpoints(self) -> 'SpacetimeGrid':
        """The n_t − 1 slices halfway between consecutive slices."""
        if self.n_t < 2:
            raise GridError("midpoints need at least 2 slices")
        return SpacetimeGrid(self.n_t - 1, self.n_x, self.dt, self.dx, self.origin_t + 0.5 * self.dt,
                             self.origin_x, self.x_boundary)

    def with_origin(self, origin_t: float) -> 'SpacetimeGrid':
        return SpacetimeGrid(self.n_t, self.n_x, self.dt, self.dx, origin_t,
                             self.origin_x, self.x_boundary)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "n_t": self.n_t,
            "n_x": self.n_x,
            "dt": self.dt,
            "dx": self.dx,
            "origin_t": self.origin_t,
            "origin_x": self.origin_x,
            "x_boundary": self.x_boundary.value
        }


@dataclass
class SpinorSlice:
    """Fixed-time restriction of a field: values has shape (n_x, 4)."""
    grid: SpacetimeGrid
    values: np.ndarray
    t_index: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        expected = (self.grid.n_x, SPINOR_COMPONENTS)
        if self.values.shape != expected:
            raise GridError(f"slice shape {self.values.shape} does not match grid {expected}")
        if not np.all(np.isfinite(self.values)):
            raise FieldError(f"non-finite values in slice {self.t_index}")

    def with_values(self, values: np.ndarray) -> 'SpinorSlice':
        return SpinorSlice(self.grid, values, self.t_index)


@dataclass
class SpinorField:
    """Four-component complex amplitude per (t, x) site, shape (n_t, n_x, 4)."""
    grid: SpacetimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise GridError(f"field shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise FieldError("non-finite values in field")

    @classmethod
    def zeros(cls, grid: SpacetimeGrid) -> 'SpinorField':
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def from_flat(cls, grid: SpacetimeGrid, flat: np.ndarray) -> 'SpinorField':
        return cls(grid, np.asarray(flat).reshape(grid.shape))

    def slice(self, t_index: int) -> SpinorSlice:
        return SpinorSlice(self.grid, self.values[t_index], t_index)

    def flat(self) -> np.ndarray:
        """Row-major (t, x, spin) view."""
        return self.values.reshape(-1)

    def density(self) -> np.ndarray:
        """ψ†ψ per site, shape (n_t, n_x)."""
        return np.sum(np.abs(self.values) ** 2, axis=-1)

    def with_values(self, values: np.ndarray) -> 'SpinorField':
        return SpinorField(self.grid, values)

    def copy(self) -> 'SpinorField':
        return SpinorField(self.grid, self.values.copy())

    def scaled(self, alpha: complex) -> 'SpinorField':
        return SpinorField(self.grid, alpha * self.values)
