from __future__ import annotations

import shutil
import socket
from pathlib import Path

import pytest

from xai_enrich.concepts import KeywordConceptMapping
from xai_enrich.config import RunConfig
from xai_enrich.model import record_from_dict, read_jsonl
from xai_enrich.pipeline import PipelineConfig, Sources

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"

ACCEPTANCE_RESULTS: list[tuple[int, str, bool]] = []


class NetworkAttempt(AssertionError):
    pass


@pytest.fixture(autouse=True)
def no_network(monkeypatch):
    """Every test runs with sockets disabled; any connect attempt fails the test."""
    attempts = []

    def guard(self, address, *args, **kwargs):
        attempts.append(address)
        raise NetworkAttempt(f"network access attempted: {address!r}")

    monkeypatch.setattr(socket.socket, "connect", guard)
    monkeypatch.setattr(socket.socket, "connect_ex", guard)
    monkeypatch.setattr(socket, "create_connection", lambda address, *a, **k: guard(None, address))
    monkeypatch.setattr(socket, "getaddrinfo", lambda host, *a, **k: guard(None, host))
    yield attempts
    assert not attempts, f"network access attempted: {attempts}"


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for var in ("EE_API_KEY", "KG_API_KEY", "WIKIFIER_USER_KEY"):
        monkeypatch.delenv(var, raising=False)
    import os

    for var in list(os.environ):
        if var.startswith("XAI_ENRICH_"):
            monkeypatch.delenv(var)


@pytest.fixture(scope="session")
def mapping() -> KeywordConceptMapping:
    return KeywordConceptMapping.from_jsonl(FIXTURES / "table1.jsonl")


@pytest.fixture(scope="session")
def records():
    return [record_from_dict(r) for r in read_jsonl(FIXTURES / "explanations.jsonl")]


@pytest.fixture
def offline_run(tmp_path) -> RunConfig:
    return RunConfig(offline=True, cache_dir=str(tmp_path / "cache"), fixture_dirs=(str(FIXTURES / "cache"),),
                     parallelism=1)


@pytest.fixture
def offline_sources(offline_run) -> Sources:
    return Sources.from_run_config(offline_run)


@pytest.fixture
def pipeline_cfg(offline_run) -> PipelineConfig:
    return PipelineConfig.from_run_config(offline_run)


@pytest.fixture
def fixture_cache_copy(tmp_path) -> Path:
    dest = tmp_path / "fixture-cache"
    shutil.copytree(FIXTURES / "cache", dest)
    return dest


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}")
