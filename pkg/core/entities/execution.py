"""
Run Execution Entities
Manifest carried by every output file and the result of one CLI command.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional


@dataclass
class RunManifest:
    """Provenance of one run; identical manifests reproduce identical outputs."""
    command: str
    scenario_hash: str
    seed: int
    code_version: str
    discretization: Dict[str, Any]
    kernel: str
    epsilon: Optional[float]
    started_at: str
    finished_at: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary."""
        return {
            "command": self.command,
            "scenario_hash": self.scenario_hash,
            "seed": self.seed,
            "code_version": self.code_version,
            "discretization": self.discretization,
            "kernel": self.kernel,
            "epsilon": self.epsilon,
            "started_at": self.started_at,
            "finished_at": self.finished_at
        }


@dataclass
class RunExecution:
    """Outcome of one orchestrated command."""
    command: str
    success: bool
    execution_time: float
    outputs: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    error_message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for logging/serialization."""
        return {
            "command": self.command,
            "success": self.success,
            "execution_time": self.execution_time,
            "outputs": list(self.outputs),
            "summary": self.summary,
            "error_message": self.error_message
        }
