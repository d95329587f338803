from __future__ import annotations

import json
import threading
from datetime import datetime, timezone

import pytest

from xai_enrich.cache import CacheEntry, ResponseCache, hash_identity
from xai_enrich.errors import CacheIOError

T0 = datetime(2021, 4, 1, tzinfo=timezone.utc)


def entry(h="abc", payload=b"{}", kind="media_event"):
    return CacheEntry(h, payload, T0, kind, {"q": 1})


def test_put_then_get(tmp_path):
    cache = ResponseCache(tmp_path)
    cache.put(entry(payload=b'{"x": 1}'))
    got = cache.get("abc")
    assert got.payload == b'{"x": 1}'
    assert got.fetched_at == T0
    assert got.source_kind == "media_event"
    assert cache.get("abc", "media_event").payload == b'{"x": 1}'


def test_unknown_hash_is_absent(tmp_path):
    assert ResponseCache(tmp_path).get("nope") is None
    assert ResponseCache(tmp_path / "missing").get("nope") is None


def test_last_writer_wins(tmp_path):
    cache = ResponseCache(tmp_path)
    cache.put(entry(payload=b"first"))
    cache.put(entry(payload=b"second"))
    assert cache.get("abc").payload == b"second"
    assert cache.stats() == {"media_event": 1}


def test_entries_survive_a_new_instance(tmp_path):
    ResponseCache(tmp_path).put(entry())
    assert ResponseCache(tmp_path).get("abc") is not None
    meta = json.loads((tmp_path / "media_event" / "abc.meta.json").read_text())
    assert meta["query_hash"] == "abc" and meta["fetched_at"] == T0.isoformat()


def test_fallback_layers_are_read_only(tmp_path):
    fixtures = ResponseCache(tmp_path / "fixtures")
    fixtures.put(entry(h="fx"))
    cache = ResponseCache(tmp_path / "cache", fallbacks=[tmp_path / "fixtures"])
    assert cache.get("fx").payload == b"{}"
    assert cache.stats() == {}
    cache.clear()
    assert fixtures.stats() == {"media_event": 1}


def test_clear_scoped_by_source(tmp_path):
    cache = ResponseCache(tmp_path)
    cache.put(entry(h="a", kind="media_event"))
    cache.put(entry(h="b", kind="dataset"))
    assert cache.clear("media_event") == 1
    assert cache.stats() == {"dataset": 1, "media_event": 0}
    assert cache.clear() == 1
    assert sum(cache.stats().values()) == 0


def test_write_failure_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(CacheIOError, match="file"):
        ResponseCache(blocker).put(entry())


def test_concurrent_writers_leave_one_complete_entry(tmp_path):
    cache = ResponseCache(tmp_path)
    payloads = [f"payload-{i}".encode() * 1000 for i in range(16)]
    threads = [threading.Thread(target=cache.put, args=(entry(payload=p),)) for p in payloads]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert cache.get("abc").payload in payloads
    assert cache.stats() == {"media_event": 1}


def test_hash_identity_is_key_order_insensitive():
    assert hash_identity({"a": 1, "b": [2]}) == hash_identity({"b": [2], "a": 1})
    assert hash_identity({"a": 1}) != hash_identity({"a": 2})
