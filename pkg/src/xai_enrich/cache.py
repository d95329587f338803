"""Content-addressed on-disk response cache.

Layout: ``<root>/<source_kind>/<query_hash>`` holds the raw payload and
``<query_hash>.meta.json`` next to it holds the sidecar metadata. The fixture
pack uses the same layout and is mounted as a read-only fallback layer.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable

from .errors import CacheIOError
from .model import parse_timestamp

META_SUFFIX = ".meta.json"


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=True, separators=(",", ":"))


def hash_identity(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CacheEntry:
    query_hash: str
    payload: bytes
    fetched_at: datetime
    source_kind: str
    query: Any = None


class ResponseCache:
    def __init__(self, root: str | os.PathLike, fallbacks: Iterable[str | os.PathLike] = ()):
        self.root = Path(root)
        self.fallbacks = [Path(p) for p in fallbacks]
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(key, threading.Lock())

    @staticmethod
    def _paths(base: Path, source_kind: str, query_hash: str) -> tuple[Path, Path]:
        d = base / source_kind
        return d / query_hash, d / (query_hash + META_SUFFIX)

    def put(self, entry: CacheEntry) -> None:
        payload_path, meta_path = self._paths(self.root, entry.source_kind, entry.query_hash)
        meta = {
            "query_hash": entry.query_hash,
            "source_kind": entry.source_kind,
            "fetched_at": entry.fetched_at.isoformat(),
            "query": entry.query,
        }
        with self._lock_for(f"{entry.source_kind}/{entry.query_hash}"):
            try:
                payload_path.parent.mkdir(parents=True, exist_ok=True)
                _atomic_write(payload_path, entry.payload)
                _atomic_write(meta_path, (json.dumps(meta, indent=2, sort_keys=True) + "\n").encode("utf-8"))
            except OSError as exc:
                raise CacheIOError(f"cannot write cache entry at {payload_path}: {exc}") from exc

    def get(self, query_hash: str, source_kind: str | None = None) -> CacheEntry | None:
        for base in [self.root, *self.fallbacks]:
            kinds = [source_kind] if source_kind else _subdirs(base)
            for kind in kinds:
                payload_path, meta_path = self._paths(base, kind, query_hash)
                if not payload_path.is_file():
                    continue
                try:
                    payload = payload_path.read_bytes()
                    meta = json.loads(meta_path.read_text("utf-8")) if meta_path.is_file() else {}
                except OSError as exc:
                    raise CacheIOError(f"cannot read cache entry at {payload_path}: {exc}") from exc
                fetched = parse_timestamp(meta.get("fetched_at")) or datetime.fromtimestamp(0).astimezone()
                return CacheEntry(query_hash, payload, fetched, kind, meta.get("query"))
        return None

    def stats(self) -> dict[str, int]:
        """Entry counts per source kind in the writable layer."""
        counts = {}
        for kind in _subdirs(self.root):
            counts[kind] = sum(
                1 for p in (self.root / kind).iterdir() if p.is_file() and not p.name.endswith(META_SUFFIX)
            )
        return counts

    def clear(self, source_kind: str | None = None) -> int:
        removed = 0
        subdirs = _subdirs(self.root)
        kinds = [source_kind] if source_kind else subdirs
        for kind in kinds:
            d = self.root / kind
            if not d.is_dir():
                continue
            for p in d.iterdir():
                if not p.is_file():
                    continue
                try:
                    p.unlink()
                except OSError as exc:
                    raise CacheIOError(f"cannot remove {p}: {exc}") from exc
                if not p.name.endswith(META_SUFFIX):
                    removed += 1
        return removed


def _subdirs(base: Path) -> list[str]:
    if base.exists() and not base.is_dir():
        raise CacheIOError(f"cache root {base} is not a directory")
    if not base.is_dir():
        return []
    return sorted(p.name for p in base.iterdir() if p.is_dir())


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
