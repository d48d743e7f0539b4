"""Persistent JSON cache of computed biseparable minima."""

from __future__ import annotations

import json
import os
import tempfile
import threading
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import RunConfig

SCHEMA_VERSION = 1
ENV_VAR = "SPINWITNESS_CACHE"


def default_cache_path() -> Path:
    override = os.environ.get(ENV_VAR)
    if override:
        return Path(override)
    base = os.environ.get("XDG_DATA_HOME") or Path.home() / ".local" / "share"
    return Path(base) / "spinwitness" / "cache.json"


def cache_key(two_s: int, N: int, topology: str = "chain", partition: int | str = "min") -> str:
    return f"{two_s}:{N}:{topology}:{partition}"


class ResultsCache:
    """Records keyed by ``two_s:N:topology:partition``.

    A record is only returned when the code version and every numerical
    setting it was computed with match the caller's; anything else is a miss.
    """

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else default_cache_path()
        self._lock = threading.Lock()
        self._records = self._load()

    def _load(self) -> dict:
        try:
            doc = json.loads(self.path.read_text())
        except FileNotFoundError:
            return {}
        except (OSError, json.JSONDecodeError):
            return {}
        if doc.get("schema") != SCHEMA_VERSION:
            return {}
        return dict(doc.get("records", {}))

    def get(self, key: str, config: RunConfig):
        rec = self._records.get(key)
        if rec is None:
            return None
        if rec.get("version") != __version__ or rec.get("tolerances") != config.numerics():
            return None
        return rec["value"]

    def put(self, key: str, value, config: RunConfig) -> None:
        with self._lock:
            self._records[key] = {
                "value": value,
                "version": __version__,
                "tolerances": config.numerics(),
                "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            }
            self._write()

    def _write(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        doc = {"schema": SCHEMA_VERSION, "records": self._records}
        fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".cache-", suffix=".json")
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
        os.replace(tmp, self.path)

    def clear(self) -> int:
        with self._lock:
            n = len(self._records)
            self._records = {}
            if self.path.exists():
                self.path.unlink()
        return n

    def keys(self) -> list[str]:
        return sorted(self._records)

    def records(self) -> dict:
        return dict(self._records)

    def __len__(self) -> int:
        return len(self._records)
