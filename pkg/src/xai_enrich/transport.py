"""HTTP transport and the cache-first fetch path used by all remote clients."""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Mapping, Protocol

import httpx

from .cache import CacheEntry, ResponseCache, hash_identity
from .errors import OfflineCacheMiss, RetryableSourceError, SourceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HttpRequest:
    method: str
    url: str
    params: Mapping[str, Any] = field(default_factory=dict)
    json_body: Any = None
    form: Mapping[str, Any] | None = None
    headers: Mapping[str, str] = field(default_factory=dict)


class Transport(Protocol):
    def send(self, source: str, request: HttpRequest) -> bytes: ...


class _RateGate:
    """Minimum spacing between request starts plus a bound on in-flight requests."""

    def __init__(self, min_interval: float, max_in_flight: int):
        self.min_interval = min_interval
        self.slots = threading.BoundedSemaphore(max_in_flight)
        self._lock = threading.Lock()
        self._next_start = 0.0

    def __enter__(self):
        self.slots.acquire()
        with self._lock:
            now = time.monotonic()
            wait = self._next_start - now
            self._next_start = max(now, self._next_start) + self.min_interval
        if wait > 0:
            time.sleep(wait)
        return self

    def __exit__(self, *exc):
        self.slots.release()


class LiveTransport:
    """httpx-backed transport with per-source politeness limits."""

    def __init__(self, *, min_interval: float = 0.2, max_in_flight: int = 4, timeout: float = 30.0,
                 client: httpx.Client | None = None):
        self._client = client or httpx.Client(timeout=timeout, headers={"User-Agent": "xai-enrich/0.1"})
        self._gates: dict[str, _RateGate] = {}
        self._gates_lock = threading.Lock()
        self.min_interval = min_interval
        self.max_in_flight = max_in_flight

    def _gate(self, source: str) -> _RateGate:
        with self._gates_lock:
            if source not in self._gates:
                self._gates[source] = _RateGate(self.min_interval, self.max_in_flight)
            return self._gates[source]

    def send(self, source: str, request: HttpRequest) -> bytes:
        with self._gate(source):
            try:
                resp = self._client.request(
                    request.method,
                    request.url,
                    params=dict(request.params) or None,
                    json=request.json_body,
                    data=dict(request.form) if request.form is not None else None,
                    headers=dict(request.headers) or None,
                )
            except httpx.HTTPError as exc:
                raise RetryableSourceError(f"{source}: request to {request.url} failed: {exc}", cause=exc) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise RetryableSourceError(
                f"{source}: HTTP {resp.status_code} from {request.url}", status_code=resp.status_code
            )
        if resp.status_code >= 400:
            raise SourceError(f"{source}: HTTP {resp.status_code} from {request.url}: {resp.text[:200]}")
        return resp.content

    def close(self) -> None:
        self._client.close()


class Fetcher:
    """Cache-first fetch; in offline mode a miss is an error, never a request."""

    def __init__(self, cache: ResponseCache, transport: Transport | None = None, *, offline: bool = False,
                 clock: Callable[[], datetime] = lambda: datetime.now(timezone.utc)):
        if not offline and transport is None:
            raise ValueError("live fetcher needs a transport")
        self.cache = cache
        self.transport = None if offline else transport
        self.offline = offline
        self.clock = clock

    def fetch(self, source_kind: str, identity: Any, request: Callable[[], HttpRequest]) -> bytes:
        query_hash = hash_identity(identity)
        hit = self.cache.get(query_hash, source_kind)
        if hit is not None:
            return hit.payload
        if self.offline or self.transport is None:
            raise OfflineCacheMiss(source_kind, query_hash, identity)
        logger.debug("cache miss %s/%s, fetching", source_kind, query_hash[:12])
        payload = self.transport.send(source_kind, request())
        self.cache.put(CacheEntry(query_hash, payload, self.clock(), source_kind, identity))
        return payload
