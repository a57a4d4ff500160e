"""
Ensemble Domain Entities
Reduced modal system for the hidden-variable analysis and its ensemble result.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import erf

from .errors import ConfigError


class EnvelopeShape(Enum):
    """Time profile of the drive rate ∂C_k/∂t."""
    GAUSSIAN = "gaussian"
    TANH = "tanh"
    CONSTANT = "constant"


class IntegrationMethod(Enum):
    """How seeded populations are obtained per ensemble sample."""
    STATIONARY = "stationary"
    DIRECT = "direct"


@dataclass(frozen=True)
class DriveEnvelope:
    """Smooth drive g(τ) with cumulative G(τ) = ∫₀^τ g."""
    shape: EnvelopeShape = EnvelopeShape.GAUSSIAN
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0

    def __post_init__(self):
        if self.width <= 0:
            raise ConfigError("drive width must be positive", field="drive.width")

    @property
    def rate(self) -> float:
        """Inverse time scale of the envelope."""
        return 0.0 if self.shape is EnvelopeShape.CONSTANT else 1.0 / self.width

    def value(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.shape is EnvelopeShape.CONSTANT:
            return self.amplitude * np.ones_like(tau)
        u = (tau - self.center) / self.width
        if self.shape is EnvelopeShape.GAUSSIAN:
            return self.amplitude * np.exp(-0.5 * u ** 2)
        return 0.5 * self.amplitude / self.width / np.cosh(u) ** 2

    def integral(self, tau):
        tau = np.asarray(tau, dtype=float)
        if self.shape is EnvelopeShape.CONSTANT:
            return self.amplitude * tau
        u = (tau - self.center) / self.width
        u0 = -self.center / self.width
        if self.shape is EnvelopeShape.GAUSSIAN:
            scale = self.amplitude * self.width * np.sqrt(np.pi / 2.0)
            return scale * (erf(u / np.sqrt(2.0)) - erf(u0 / np.sqrt(2.0)))
        return 0.5 * self.amplitude * (np.tanh(u) - np.tanh(u0))

    def to_dict(self) -> Dict[str, Any]:
        return {"shape": self.shape.value, "amplitude": self.amplitude,
                "center": self.center, "width": self.width}


@dataclass
class ModalSystem:
    """Energies, γ⁰ overlaps, initial coefficients and the drive of a few modes.

    Modes with non-zero drive weight follow C_k(τ) = C_k(0) + d_k·G(τ); the rest
    are constrained by the vanishing of their Dirac residual.
    """
    energies: np.ndarray
    gamma0: np.ndarray
    initial: np.ndarray
    drive_weights: np.ndarray
    drive: DriveEnvelope = field(default_factory=DriveEnvelope)
    energy_slopes: Optional[np.ndarray] = None
    outcome_groups: Optional[Dict[str, Tuple[int, ...]]] = None
    mass: float = 1.0

    def __post_init__(self):
        self.energies = np.asarray(self.energies, dtype=float)
        n = self.energies.shape[0]
        self.gamma0 = np.asarray(self.gamma0, dtype=complex).reshape(n, n)
        self.initial = np.asarray(self.initial, dtype=complex).reshape(n)
        self.drive_weights = np.asarray(self.drive_weights, dtype=complex).reshape(n)
        if self.energy_slopes is None:
            self.energy_slopes = np.zeros(n)
        self.energy_slopes = np.asarray(self.energy_slopes, dtype=float).reshape(n)
        if not np.allclose(self.gamma0, self.gamma0.conj().T, atol=1e-12):
            raise ConfigError("gamma0 overlap matrix must be Hermitian", field="gamma0")
        if np.any(self.energies == 0.0):
            raise ConfigError("mode energies must be non-zero", field="energies")
        if self.mass <= 0:
            raise ConfigError("mass must be positive", field="mass")
        if self.outcome_groups is None:
            self.outcome_groups = {str(j): (j,) for j in range(n)}
        for label, members in self.outcome_groups.items():
            if not members or any(not 0 <= j < n for j in members):
                raise ConfigError(f"outcome group '{label}' has invalid members",
                                  field="outcome_groups")

    @property
    def n_modes(self) -> int:
        return self.energies.shape[0]

    @property
    def signs(self) -> np.ndarray:
        return np.sign(self.energies)

    @property
    def driven(self) -> np.ndarray:
        return self.drive_weights != 0

    @property
    def initial_weights(self) -> np.ndarray:
        return np.abs(self.initial) ** 2

    def opposite_sign_mask(self) -> np.ndarray:
        """Boolean (n, n): E_j·E_k < 0."""
        return np.outer(self.energies, self.energies) < 0

    def gaps(self) -> np.ndarray:
        """ΔE_jk at τ = 0."""
        return self.energies[:, None] - self.energies[None, :]

    def gap_slopes(self) -> np.ndarray:
        return self.energy_slopes[:, None] - self.energy_slopes[None, :]

    def phase_integrals(self, t: float, t_i: float) -> np.ndarray:
        """w_jk(t) = ∫₀ᵗ ΔE_jk(t′ − t_i) dt′ for linear energy drifts."""
        return self.gaps() * t + 0.5 * self.gap_slopes() * ((t - t_i) ** 2 - t_i ** 2)

    def group_weights(self) -> Dict[str, float]:
        weights = self.initial_weights
        return {label: float(np.sum(weights[list(members)]))
                for label, members in self.outcome_groups.items()}

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        def pairs(values):
            return [[complex(v).real, complex(v).imag] for v in values]
        return {
            "energies": [float(e) for e in self.energies],
            "energy_slopes": [float(s) for s in self.energy_slopes],
            "gamma0": [pairs(row) for row in self.gamma0],
            "initial": pairs(self.initial),
            "drive_weights": pairs(self.drive_weights),
            "drive": self.drive.to_dict(),
            "outcome_groups": {k: list(v) for k, v in self.outcome_groups.items()},
            "mass": self.mass
        }


@dataclass(frozen=True)
class EnsembleConfig:
    """Sampling plan for the t_i ensemble."""
    n_samples: int
    duration: float
    window_periods: float = 100.0
    seed: int = 0
    method: IntegrationMethod = IntegrationMethod.STATIONARY
    decay_strength: float = 40.0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be positive, got {self.n_samples}", field="n_samples")
        if self.duration <= 0:
            raise ConfigError("duration must be positive", field="duration")
        if self.window_periods <= 0:
            raise ConfigError("window_periods must be positive", field="window_periods")
        if self.decay_strength <= 0:
            raise ConfigError("decay_strength must be positive", field="decay_strength")

    def to_dict(self) -> Dict[str, Any]:
        return {"n_samples": self.n_samples, "duration": self.duration,
                "window_periods": self.window_periods, "seed": self.seed,
                "method": self.method.value, "decay_strength": self.decay_strength}


@dataclass
class EnsembleResult:
    """Per-t_i outcomes and aggregate frequencies."""
    t_i: np.ndarray
    winners: List[Optional[str]]
    populations: np.ndarray                    # (n_samples, n_modes) final
    seeded: np.ndarray                         # (n_samples, n_modes) before decay
    ties: np.ndarray                           # bool per sample
    frequencies: Dict[str, float]
    initial_weights: Dict[str, float]
    confidence: Dict[str, Tuple[float, float]]
    seed: int
    mean_populations: Dict[str, float] = field(default_factory=dict)

    @property
    def n_ties(self) -> int:
        return int(np.sum(self.ties))

    @property
    def n_counted(self) -> int:
        return int(len(self.winners) - self.n_ties)

    @property
    def max_frequency_deviation(self) -> float:
        """Largest |F_j − Y_j| over the outcome groups."""
        return float(max((abs(self.frequencies[k] - self.initial_weights[k]) for k in self.frequencies),
                         default=0.0))

    def to_dict(self) -> Dict[str, Any]:
        """Summary without per-sample arrays."""
        return {
            "n_samples": int(len(self.winners)),
            "n_counted": self.n_counted,
            "n_ties": self.n_ties,
            "seed": self.seed,
            "initial_weights": dict(self.initial_weights),
            "frequencies": dict(self.frequencies),
            "confidence": {k: [lo, hi] for k, (lo, hi) in self.confidence.items()},
            "mean_populations": dict(self.mean_populations),
            "max_frequency_deviation": self.max_frequency_deviation
        }
