"""
Weight Table Cache
Persistent table of four-point weights W keyed by canonical spatial separations.
"""

import hashlib
import json
from collections.abc import MutableMapping
from pathlib import Path
from typing import Dict, Iterator, Optional

from infrastructure.config.settings import settings
from shared.utils.logger import get_logger

storage_logger = get_logger("weight_cache")

TABLE_VERSION = 1


def _digest(entries: Dict[str, float]) -> str:
    body = json.dumps(entries, sort_keys=True).encode("utf-8")
    return hashlib.sha256(body).hexdigest()


class WeightTableCache(MutableMapping):
    """
    JSON file with a version and sha256 header.

    A missing, corrupted or foreign-version file yields an empty table that is
    recomputed and rewritten on save().
    """

    def __init__(self, path: Optional[Path] = None):
        location = path if path is not None else settings.sampling.weight_cache_path
        self.path = Path(location) if location else None
        self._entries: Dict[str, float] = {}
        self._dirty = False
        self._load()

    def _load(self):
        if self.path is None or not self.path.exists():
            return
        try:
            document = json.loads(self.path.read_text(encoding="utf-8"))
            entries = {str(k): float(v) for k, v in document["entries"].items()}
            if document.get("version") != TABLE_VERSION:
                raise ValueError(f"version {document.get('version')} != {TABLE_VERSION}")
            if document.get("sha256") != _digest(entries):
                raise ValueError("checksum mismatch")
        except (OSError, ValueError, KeyError, TypeError, AttributeError) as e:
            storage_logger.warning("Discarding weight table", path=str(self.path), reason=str(e))
            return
        self._entries = entries
        storage_logger.debug("Weight table loaded", path=str(self.path), entries=len(entries))

    def save(self) -> bool:
        """Write the table if it changed; False when there is nowhere to write."""
        if self.path is None or not self._dirty:
            return False
        document = {"version": TABLE_VERSION, "sha256": _digest(self._entries),
                    "entries": self._entries}
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text(json.dumps(document, sort_keys=True), encoding="utf-8")
        except OSError as e:
            storage_logger.warning("Could not write weight table", path=str(self.path), reason=str(e))
            return False
        self._dirty = False
        return True

    def __getitem__(self, key: str) -> float:
        return self._entries[key]

    def __setitem__(self, key: str, value: float):
        self._entries[key] = float(value)
        self._dirty = True

    def __delitem__(self, key: str):
        del self._entries[key]
        self._dirty = True

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)
