"""
Domain Errors
Exception hierarchy raised by the simulator core.
"""

from typing import Optional


class SimulationError(Exception):
    """Base class for every error raised by the simulator."""


class GridError(SimulationError, ValueError):
    """Inconsistent grid, shape or operator input."""


class StencilError(GridError):
    """Too few sites along an active axis for the finite-difference stencil."""


class FieldError(SimulationError, ValueError):
    """Field values are not finite or have the wrong shape."""


class ZeroNormError(SimulationError, ValueError):
    """Expectation requested for a field with zero norm."""


class EstimatorError(SimulationError, RuntimeError):
    """Monte Carlo ratio estimate is undefined (no support or vanishing denominator)."""


class SolverError(SimulationError, RuntimeError):
    """Propagation or optimization could not proceed."""


class ConfigError(SimulationError, ValueError):
    """Invalid scenario or ensemble configuration."""

    def __init__(self, message: str, field: Optional[str] = None,
                 line: Optional[int] = None, column: Optional[int] = None):
        self.field = field
        self.line = line
        self.column = column
        location = ""
        if field:
            location += f" [field: {field}]"
        if line is not None:
            location += f" [line {line}, column {column}]"
        super().__init__(f"{message}{location}")
