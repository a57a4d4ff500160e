"""
Scenario Domain Entities
Experiment setup for the collapse solver and its diagnostics.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .action import ActionConfig, ActionReport, KernelChoice
from .dirac import MassParameter, PotentialSchedule
from .errors import ConfigError
from .grid import SpacetimeGrid, SpinorField


class BoundaryPolicy(Enum):
    """Which slices are frozen during minimization."""
    FIX_INITIAL = "fix-initial"
    FIX_BOTH = "fix-both"


class FinalSlice(Enum):
    """Data used for the last slice under fix-both."""
    PROPAGATED = "propagated"
    TIME_REVERSED_INITIAL = "time-reversed-initial"


class InitialStateKind(Enum):
    """How the initial slice is built."""
    MODES = "modes"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class InitialState:
    """Initial slice: either mode amplitudes or a Gaussian packet."""
    kind: InitialStateKind = InitialStateKind.MODES
    amplitudes: Tuple[Tuple[int, complex], ...] = ()
    center: float = 0.0
    width: float = 1.0
    momentum: float = 0.0
    spinor: Tuple[complex, complex, complex, complex] = (1.0, 0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.kind is InitialStateKind.MODES and not self.amplitudes:
            raise ConfigError("mode initial state needs at least one amplitude",
                              field="initial_state.amplitudes")
        if self.width <= 0:
            raise ConfigError("packet width must be positive", field="initial_state.width")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "kind": self.kind.value,
            "amplitudes": [[j, [c.real, c.imag]] for j, c in
                           ((j, complex(c)) for j, c in self.amplitudes)],
            "center": self.center,
            "width": self.width,
            "momentum": self.momentum,
            "spinor": [[complex(c).real, complex(c).imag] for c in self.spinor]
        }


@dataclass(frozen=True)
class Scenario:
    """Everything needed to initialize and minimize one field."""
    name: str
    grid: SpacetimeGrid
    mass: MassParameter
    schedule: PotentialSchedule
    initial_state: InitialState
    epsilon: float
    t_i: float = 0.0
    boundary: BoundaryPolicy = BoundaryPolicy.FIX_INITIAL
    final_slice: FinalSlice = FinalSlice.PROPAGATED
    kernel: KernelChoice = field(default_factory=KernelChoice)
    seed: int = 0
    quadruple_samples: int = 4000
    max_iterations: int = 200
    gradient_tolerance: float = 1e-9
    top_k: Optional[int] = None

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ConfigError(f"epsilon must be non-negative, got {self.epsilon}", field="epsilon")
        if self.max_iterations < 0:
            raise ConfigError("max_iterations must be non-negative", field="max_iterations")

    def action_config(self, **overrides) -> ActionConfig:
        options = dict(epsilon=self.epsilon, kernel=self.kernel,
                       quadruple_samples=self.quadruple_samples, seed=self.seed)
        options.update(overrides)
        return ActionConfig(**options)

    def frozen_slices(self) -> List[int]:
        if self.boundary is BoundaryPolicy.FIX_BOTH:
            return [0, self.grid.n_t - 1]
        return [0]


class OptimizationStatus(Enum):
    """Why the minimizer stopped."""
    CONVERGED = "converged"
    BUDGET_EXHAUSTED = "budget_exhausted"
    LINE_SEARCH_FAILED = "line_search_failed"


@dataclass
class OptimizationResult:
    """Minimized field with its iteration log."""
    field: SpinorField
    log: List[ActionReport]
    status: OptimizationStatus
    message: str = ""

    @property
    def n_iterations(self) -> int:
        return max(len(self.log) - 1, 0)

    @property
    def final_report(self) -> ActionReport:
        return self.log[-1]


@dataclass
class CollapseDiagnostics:
    """Population history and the dominance verdict."""
    times: np.ndarray
    populations: np.ndarray        # raw |C_j(t)|², (n_slices, n_modes)
    totals: np.ndarray             # Σ_j |C_j|² per slice
    residuals: np.ndarray
    threshold: float
    winner: Optional[int]
    dominance_index: Optional[int]
    dominance_time: Optional[float]
    reliable: bool
    final_a1: Optional[float] = None
    final_a2: Optional[float] = None

    @property
    def final_max_population(self) -> float:
        return float(np.max(self.populations[-1]))

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary (no per-slice arrays)."""
        return {
            "winner": self.winner,
            "dominance_index": self.dominance_index,
            "dominance_time": self.dominance_time,
            "threshold": self.threshold,
            "reliable": self.reliable,
            "final_populations": [float(p) for p in self.populations[-1]],
            "final_total": float(self.totals[-1]),
            "max_total_deviation": float(np.max(np.abs(self.totals - 1.0))),
            "max_residual": float(np.max(self.residuals)),
            "final_a1": self.final_a1,
            "final_a2": self.final_a2
        }
