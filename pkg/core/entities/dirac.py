"""
Dirac Domain Entities
Gamma matrices, mass, electromagnetic potentials and their schedules.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Tuple

import numpy as np

from .errors import GridError
from .grid import SpacetimeGrid

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class GammaSet:
    """The four Dirac matrices γ^μ, metric (+,−,−,−)."""
    gamma0: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    gamma3: np.ndarray

    def __getitem__(self, mu: int) -> np.ndarray:
        return (self.gamma0, self.gamma1, self.gamma2, self.gamma3)[mu]

    def as_tuple(self) -> Tuple[np.ndarray, ...]:
        return (self.gamma0, self.gamma1, self.gamma2, self.gamma3)

    def alpha(self, i: int) -> np.ndarray:
        """γ⁰γ^i, the velocity matrix along axis i (1..3)."""
        return self.gamma0 @ self[i]

    def slash(self, vector) -> np.ndarray:
        """γ^μ a_μ for a contravariant four-vector a^μ."""
        lowered = METRIC @ np.asarray(vector, dtype=complex)
        return sum(lowered[mu] * self[mu] for mu in range(4))


@dataclass(frozen=True)
class MassParameter:
    """Particle mass m > 0; sets the time and length scale."""
    m: float = 1.0

    def __post_init__(self):
        if not self.m > 0:
            raise GridError(f"mass must be positive, got {self.m}")

    @property
    def zitterbewegung_period(self) -> float:
        """Period 2π/(2m) of positive/negative energy beats."""
        return np.pi / self.m


@dataclass
class Potential:
    """Four-potential A^μ sampled on every grid site, components shape (4, n_t, n_x)."""
    grid: SpacetimeGrid
    components: np.ndarray
    charge: float = 1.0

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=float)
        expected = (4, self.grid.n_t, self.grid.n_x)
        if self.components.shape != expected:
            raise GridError(f"potential shape {self.components.shape} does not match {expected}")

    @classmethod
    def zeros(cls, grid: SpacetimeGrid, charge: float = 1.0) -> 'Potential':
        return cls(grid, np.zeros((4, grid.n_t, grid.n_x)), charge)

    @property
    def is_vector_free(self) -> bool:
        return not np.any(self.components[1:])

    def slice(self, t_index: int) -> np.ndarray:
        """A^μ on one time slice, shape (4, n_x)."""
        return self.components[:, t_index, :]

    def smoothness(self) -> float:
        """Largest neighbour-to-neighbour change relative to the largest magnitude."""
        scale = np.max(np.abs(self.components))
        if scale == 0.0:
            return 0.0
        jumps = [0.0]
        if self.grid.n_t > 1:
            jumps.append(np.max(np.abs(np.diff(self.components, axis=1))))
        if self.grid.n_x > 1:
            jumps.append(np.max(np.abs(np.diff(self.components, axis=2))))
        return float(max(jumps) / scale)

    def time_reversed(self) -> 'Potential':
        """Scalar part mirrored in time; vector part mirrored and negated."""
        mirrored = self.components[:, ::-1, :].copy()
        mirrored[1:] *= -1.0
        return Potential(self.grid, mirrored, self.charge)


class TemporalShape(Enum):
    """Time profile of a potential term, in τ = t − t_i."""
    CONSTANT = "constant"
    RAMP = "ramp"
    STEP = "step"
    PULSE = "pulse"
    TANH = "tanh"


class SpatialShape(Enum):
    """Spatial profile of a potential term."""
    UNIFORM = "uniform"
    COSINE = "cosine"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PotentialTerm:
    """One named primitive contribution to A^μ(τ, x)."""
    component: int = 0
    amplitude: float = 0.0
    temporal: TemporalShape = TemporalShape.CONSTANT
    onset: float = 0.0
    duration: float = 1.0
    spatial: SpatialShape = SpatialShape.UNIFORM
    wavenumber: int = 1
    center: float = 0.0
    spread: float = 1.0

    def __post_init__(self):
        if self.component not in (0, 1, 2, 3):
            raise GridError(f"potential component must be 0..3, got {self.component}")
        if self.duration <= 0 or self.spread <= 0:
            raise GridError("potential duration and spread must be positive")

    def temporal_profile(self, tau: np.ndarray) -> np.ndarray:
        shifted = (tau - self.onset) / self.duration
        if self.temporal is TemporalShape.CONSTANT:
            return np.ones_like(tau)
        if self.temporal is TemporalShape.RAMP:
            return tau - self.onset
        if self.temporal is TemporalShape.STEP:
            return (tau >= self.onset).astype(float)
        if self.temporal is TemporalShape.PULSE:
            return np.exp(-0.5 * shifted ** 2)
        return 0.5 * (1.0 + np.tanh(shifted))

    def spatial_profile(self, x: np.ndarray, length: float) -> np.ndarray:
        if self.spatial is SpatialShape.UNIFORM:
            return np.ones_like(x)
        if self.spatial is SpatialShape.COSINE:
            return np.cos(2.0 * np.pi * self.wavenumber * (x - self.center) / length)
        return np.exp(-0.5 * ((x - self.center) / self.spread) ** 2)

    def evaluate(self, tau: np.ndarray, x: np.ndarray, length: float) -> np.ndarray:
        """Outer product profile, shape (len(tau), len(x))."""
        return self.amplitude * np.outer(self.temporal_profile(tau), self.spatial_profile(x, length))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "component": self.component,
            "amplitude": self.amplitude,
            "temporal": self.temporal.value,
            "onset": self.onset,
            "duration": self.duration,
            "spatial": self.spatial.value,
            "wavenumber": self.wavenumber,
            "center": self.center,
            "spread": self.spread
        }


@dataclass(frozen=True)
class PotentialSchedule:
    """Sum of primitive terms; sampled relative to the hidden start time t_i."""
    terms: Tuple[PotentialTerm, ...] = field(default_factory=tuple)
    charge: float = 1.0

    def sample(self, grid: SpacetimeGrid, t_i: float = 0.0) -> Potential:
        components = np.zeros((4, grid.n_t, grid.n_x))
        tau = grid.times - t_i
        for term in self.terms:
            components[term.component] += term.evaluate(tau, grid.positions, grid.length)
        return Potential(grid, components, self.charge)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "charge": self.charge,
            "terms": [term.to_dict() for term in self.terms]
        }
