"""Embedded event storage for learner records.

The engine persists every mutation as an appended event keyed by learner;
reopening a JsonlStore replays the log, so rebuilding an engine from the
same file reproduces the same state.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional


class MemoryStore:
    """In-memory store: put/get for snapshots, append/stream for event logs."""

    def __init__(self):
        self._values: Dict[str, Any] = {}
        self._streams: Dict[str, List[Any]] = {}
        self._lock = threading.Lock()

    def put(self, key: str, value: Any) -> None:
        with self._lock:
            self._values[key] = value

    def get(self, key: str, default: Any = None) -> Any:
        with self._lock:
            return self._values.get(key, default)

    def append(self, key: str, value: Any) -> None:
        with self._lock:
            self._streams.setdefault(key, []).append(value)

    def stream(self, key: str) -> List[Any]:
        with self._lock:
            return list(self._streams.get(key, []))

    def stream_keys(self) -> List[str]:
        with self._lock:
            return sorted(self._streams)


class JsonlStore(MemoryStore):
    """Single-file store: every mutation is one JSON line, replayed on open."""

    def __init__(self, path):
        super().__init__()
        self._path = Path(path)
        self._file_lock = threading.Lock()
        if self._path.exists():
            with self._path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    if record["op"] == "put":
                        super().put(record["key"], record["value"])
                    else:
                        super().append(record["key"], record["value"])
        else:
            self._path.parent.mkdir(parents=True, exist_ok=True)
            self._path.touch()

    def _write(self, op: str, key: str, value: Any) -> None:
        line = json.dumps({"op": op, "key": key, "value": value}, sort_keys=True)
        with self._file_lock:
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def put(self, key: str, value: Any) -> None:
        super().put(key, value)
        self._write("put", key, value)

    def append(self, key: str, value: Any) -> None:
        super().append(key, value)
        self._write("append", key, value)
