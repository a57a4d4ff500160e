"""
Action Domain Entities
Kernel choice, action configuration, estimates and per-iteration reports.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

from .errors import ConfigError


class KernelVariant(Enum):
    """Spacelike two-point kernels f(z)."""
    STEP = "step"
    INVERSE_DISTANCE = "invdist"
    COVARIANT = "covariant"


class GradientMode(Enum):
    """How the action gradient is obtained."""
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"


class EstimateMethod(Enum):
    """How an expectation was evaluated."""
    EXACT = "exact"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class KernelChoice:
    """Kernel variant; the metric signature is fixed to (+,−,−,−)."""
    variant: KernelVariant = KernelVariant.COVARIANT

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant.value, "signature": "+---"}


@dataclass
class Estimate:
    """Ratio-estimator result with its batch standard error."""
    value: float
    stderr: float = 0.0
    n_samples: int = 0
    method: EstimateMethod = EstimateMethod.EXACT
    excluded_fraction: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "value": self.value,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "method": self.method.value,
            "excluded_fraction": self.excluded_fraction
        }


@dataclass(frozen=True)
class ActionConfig:
    """Weight of the collapse term and how both terms are evaluated."""
    epsilon: float = 0.0
    kernel: KernelChoice = field(default_factory=KernelChoice)
    quadruple_samples: int = 4000
    batches: int = 20
    seed: int = 0
    gradient_mode: GradientMode = GradientMode.ANALYTIC
    density_floor: float = 1e-8
    include_uncertainties: bool = False

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ConfigError(f"epsilon must be non-negative, got {self.epsilon}", field="epsilon")
        if self.quadruple_samples < 1:
            raise ConfigError("quadruple_samples must be positive", field="quadruple_samples")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "epsilon": self.epsilon,
            "kernel": self.kernel.variant.value,
            "quadruple_samples": self.quadruple_samples,
            "batches": self.batches,
            "seed": self.seed,
            "gradient_mode": self.gradient_mode.value,
            "density_floor": self.density_floor,
            "include_uncertainties": self.include_uncertainties
        }


@dataclass
class ActionReport:
    """Value of A₁ + εA₂ and its parts at one iterate."""
    a1: float
    a2: float
    a2_stderr: float
    epsilon: float
    gradient_norm: Optional[float] = None
    iteration: int = 0
    breakdown: Dict[str, float] = field(default_factory=dict)
    round_index: int = 0

    @property
    def total(self) -> float:
        return self.a1 + self.epsilon * self.a2

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "iteration": self.iteration,
            "round": self.round_index,
            "a1": self.a1,
            "a2": self.a2,
            "a2_stderr": self.a2_stderr,
            "epsilon": self.epsilon,
            "total": self.total,
            "gradient_norm": self.gradient_norm,
            "breakdown": dict(self.breakdown)
        }
