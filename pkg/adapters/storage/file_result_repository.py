"""
File Result Repository
Writes manifests, field containers, CSV tables, JSON lines and summaries to a run directory.
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from core.entities.errors import ConfigError
from core.entities.execution import RunManifest
from core.entities.grid import SpacetimeGrid, SpinorField, XBoundary
from core.interfaces.result_repository import ResultRepositoryInterface
from shared.utils.logger import get_logger

storage_logger = get_logger("storage")

FIELD_FORMATS = ("npz", "json")


def format_number(value: Any) -> str:
    """Shortest round-tripping decimal for floats; plain str otherwise."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    return str(value)


def _grid_from_dict(payload: Dict[str, Any]) -> SpacetimeGrid:
    return SpacetimeGrid(n_t=int(payload["n_t"]), n_x=int(payload["n_x"]),
                         dt=float(payload["dt"]), dx=float(payload["dx"]),
                         origin_t=float(payload.get("origin_t", 0.0)),
                         origin_x=float(payload.get("origin_x", 0.0)),
                         x_boundary=XBoundary(payload.get("x_boundary", "periodic")))


class FileResultRepository(ResultRepositoryInterface):
    """Run directory on the local filesystem."""

    def __init__(self, out_dir: Path, manifest: Optional[RunManifest] = None):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.manifest = manifest
        self._written: List[Path] = []

    def _provenance(self) -> Dict[str, Any]:
        """Manifest fields that do not change between identical reruns."""
        if self.manifest is None:
            return {}
        return {"command": self.manifest.command, "scenario_hash": self.manifest.scenario_hash,
                "seed": self.manifest.seed, "code_version": self.manifest.code_version,
                "kernel": self.manifest.kernel}

    def _track(self, path: Path) -> Path:
        if path not in self._written:
            self._written.append(path)
        storage_logger.debug("Output written", path=str(path))
        return path

    def write_manifest(self, manifest: RunManifest) -> Path:
        self.manifest = manifest
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return self._track(path)

    def write_field(self, name: str, field: SpinorField, fmt: str = "npz") -> Path:
        if fmt not in FIELD_FORMATS:
            raise ConfigError(f"unknown field format '{fmt}'", field="format")
        header = {"grid": field.grid.to_dict(), "manifest": self._provenance(), "particles": 1}
        if fmt == "npz":
            path = self.out_dir / f"{name}.npz"
            np.savez_compressed(path, values=field.values, header=json.dumps(header, sort_keys=True))
        else:
            path = self.out_dir / f"{name}.json"
            payload = dict(header, values_real=field.values.real.tolist(),
                           values_imag=field.values.imag.tolist())
            path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        return self._track(path)

    def read_field(self, path: Path) -> SpinorField:
        path = Path(path)
        if path.suffix == ".npz":
            with np.load(path) as archive:
                header = json.loads(str(archive["header"]))
                values = archive["values"]
        elif path.suffix == ".json":
            header = json.loads(path.read_text(encoding="utf-8"))
            values = np.asarray(header["values_real"]) + 1j * np.asarray(header["values_imag"])
        else:
            raise ConfigError(f"unknown field container '{path.suffix}'", field="format")
        return SpinorField(_grid_from_dict(header["grid"]), values)

    def write_table(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.out_dir / f"{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as handle:
            provenance = self._provenance()
            if provenance:
                handle.write("# " + json.dumps(provenance, sort_keys=True) + "\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_number(v) for v in row])
        return self._track(path)

    def write_json_lines(self, name: str, records: Iterable[Dict[str, Any]]) -> Path:
        path = self.out_dir / f"{name}.jsonl"
        with path.open("w", encoding="utf-8") as handle:
            for record in records:
                handle.write(json.dumps(record, sort_keys=True) + "\n")
        return self._track(path)

    def write_summary(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self.out_dir / f"{name}.json"
        document = dict(payload, manifest=self.manifest.to_dict() if self.manifest else None)
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return self._track(path)

    def list_outputs(self) -> List[Path]:
        return list(self._written)
