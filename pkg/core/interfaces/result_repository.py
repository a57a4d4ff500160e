"""
Result Repository Interface
Defines contract for persisting run artifacts.
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

from ..entities.execution import RunManifest
from ..entities.grid import SpinorField


class ResultRepositoryInterface(ABC):
    """Interface for result storage implementations."""

    @abstractmethod
    def write_manifest(self, manifest: RunManifest) -> Path:
        """Write manifest.json."""
        pass

    @abstractmethod
    def write_field(self, name: str, field: SpinorField, fmt: str = "npz") -> Path:
        """Write a field container (npz or json)."""
        pass

    @abstractmethod
    def read_field(self, path: Path) -> SpinorField:
        """Read a field container written by write_field."""
        pass

    @abstractmethod
    def write_table(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """Write a CSV table with full-precision numbers."""
        pass

    @abstractmethod
    def write_json_lines(self, name: str, records: Iterable[Dict[str, Any]]) -> Path:
        """Write one JSON object per line."""
        pass

    @abstractmethod
    def write_summary(self, name: str, payload: Dict[str, Any]) -> Path:
        """Write a JSON document."""
        pass

    @abstractmethod
    def list_outputs(self) -> List[Path]:
        """Paths written so far."""
        pass
