from __future__ import annotations

import io
import json
import shutil

import pytest

from xai_enrich import cli
from xai_enrich.model import read_jsonl

from .conftest import FIXTURES, ROOT

GOLDEN = FIXTURES / "golden"


@pytest.fixture
def at_root(monkeypatch, tmp_path):
    """Run from the repo root like a user would, with a throwaway writable cache."""
    monkeypatch.chdir(ROOT)
    monkeypatch.setenv("XAI_ENRICH_CACHE_DIR", str(tmp_path / "cache"))
    return tmp_path


def run(*argv) -> int:
    return cli.main([str(a) for a in argv])


# ----------------------------------------------------------- enrich


def test_enrich_reproduces_golden(at_root):
    out = at_root / "out.jsonl"
    assert run("enrich", "--input", "fixtures/explanations.jsonl", "--mapping", "fixtures/table1.jsonl",
               "--offline", "--out", out) == 0
    assert out.read_bytes() == (GOLDEN / "enriched.jsonl").read_bytes()
    assert not (at_root / "errors.jsonl").exists()


def test_enrich_missing_mapping(at_root, capsys):
    missing = at_root / "nowhere" / "table1.jsonl"
    assert run("enrich", "--input", "fixtures/explanations.jsonl", "--mapping", missing, "--offline",
               "--out", at_root / "o.jsonl") == 1
    assert str(missing) in capsys.readouterr().err


def test_enrich_partial_failure(at_root, capsys):
    rows = read_jsonl(FIXTURES / "explanations.jsonl")[:3]
    rows[1]["feature_keywords"].append({"phrase": "Zorblax Index"})
    corpus = at_root / "corpus.jsonl"
    corpus.write_text("".join(json.dumps(r) + "\n" for r in rows))
    out = at_root / "run" / "out.jsonl"
    assert run("enrich", "--input", corpus, "--mapping", "fixtures/table1.jsonl", "--offline", "--out", out) == 2
    assert len(read_jsonl(out)) == 2
    [err] = read_jsonl(out.with_name("errors.jsonl"))
    assert err["explanation_id"] == rows[1]["explanation_id"]
    assert err["error_type"] == "UnmappedKeywordError"
    assert "Zorblax Index" in err["message"]


def test_enrich_fail_fast_is_fatal(at_root):
    rows = read_jsonl(FIXTURES / "explanations.jsonl")[:2]
    rows[0]["feature_keywords"] = [{"phrase": "Zorblax Index"}]
    corpus = at_root / "corpus.jsonl"
    corpus.write_text("".join(json.dumps(r) + "\n" for r in rows))
    assert run("enrich", "--input", corpus, "--mapping", "fixtures/table1.jsonl", "--offline", "--fail-fast",
               "--out", at_root / "o.jsonl") == 1


def test_enrich_offline_cold_cache_is_fatal(at_root, capsys):
    assert run("enrich", "--input", "fixtures/explanations.jsonl", "--mapping", "fixtures/table1.jsonl",
               "--offline", "--fixtures", at_root / "empty", "--out", at_root / "o.jsonl") == 2
    [first, *_] = read_jsonl(at_root / "errors.jsonl")
    assert first["error_type"] == "OfflineCacheMiss"


def test_enrich_bad_config_is_fatal(at_root, capsys):
    cfg = at_root / "run.yaml"
    cfg.write_text("pipeline:\n  bogus: 1\n")
    assert run("enrich", "--config", cfg, "--input", "fixtures/explanations.jsonl", "--mapping",
               "fixtures/table1.jsonl", "--offline") == 1
    assert "unknown config key" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["enrich", "--mapping", "m.jsonl"],
    ["enrich", "--input", "a", "--mapping", "b", "--top-n", "0"],
    ["bogus"],
])
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 64


# ----------------------------------------------------------- evaluate


def test_evaluate_reproduces_golden(at_root, capsys):
    report = at_root / "report"
    assert run("evaluate", "--enriched", GOLDEN / "enriched.jsonl", "--judgments", "fixtures/judgments.jsonl",
               "--k", "1,3", "--report-dir", report) == 0
    assert (report / "report.json").read_bytes() == (GOLDEN / "report.json").read_bytes()
    assert (report / "report.tsv").read_bytes() == (GOLDEN / "report.tsv").read_bytes()
    assert (report / "report.png").stat().st_size > 0
    assert "Average Precision@1" in capsys.readouterr().out


def test_evaluate_k_zero_is_usage_error(at_root):
    with pytest.raises(SystemExit) as info:
        run("evaluate", "--enriched", GOLDEN / "enriched.jsonl", "--judgments", "fixtures/judgments.jsonl", "--k", "0")
    assert info.value.code == 64


def test_evaluate_empty_enriched_reports_no_data(at_root, capsys):
    empty = at_root / "empty.jsonl"
    empty.write_text("")
    assert run("evaluate", "--enriched", empty, "--judgments", "fixtures/judgments.jsonl",
               "--report-dir", at_root / "r", "--no-figure") == 0
    assert "no data" in capsys.readouterr().out
    assert not (at_root / "r" / "report.png").exists()


def test_evaluate_strict_gap_lists_entries(at_root, capsys):
    judgments = at_root / "j.jsonl"
    rows = read_jsonl(FIXTURES / "judgments.jsonl")
    judgments.write_text("".join(json.dumps(r) + "\n" for r in rows[1:]))
    args = ["evaluate", "--enriched", GOLDEN / "enriched.jsonl", "--judgments", judgments, "--report-dir", at_root / "r",
            "--no-figure"]
    assert run(*args) == 1
    assert rows[0]["candidate_id"] in capsys.readouterr().err
    assert run(*args, "--lenient") == 0


def test_evaluate_two_runs_side_by_side(at_root, capsys):
    second = at_root / "baseline.jsonl"
    shutil.copy(GOLDEN / "enriched.jsonl", second)
    assert run("evaluate", "--enriched", GOLDEN / "enriched.jsonl", "--enriched", second, "--label", "semantic",
               "--judgments", "fixtures/judgments.jsonl", "--report-dir", at_root / "r", "--figure-format", "svg") == 0
    header = (at_root / "r" / "report.tsv").read_text().splitlines()[0]
    assert header == "section\tmetric\tsemantic\tbaseline"
    assert (at_root / "r" / "report.svg").exists()


# ----------------------------------------------------------- wikify


@pytest.mark.parametrize("text, labels", [
    ("Car Sales Demand", ["Car", "Demand"]),
    ("Purchasing Managers' Index", ["Manager (Gaelic games)"]),
])
def test_wikify_fixture_examples(at_root, capsys, text, labels):
    assert run("wikify", "--text", text, "--offline") == 0
    lines = capsys.readouterr().out.splitlines()
    assert [l.split("\t")[0] for l in lines] == labels


def test_wikify_reads_stdin(at_root, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("Car Sales Demand\n"))
    assert run("wikify", "--offline") == 0
    assert capsys.readouterr().out.startswith("Car\thttp://en.wikipedia.org/wiki/Car\tother\t1.000")


def test_wikify_empty_stdin_is_usage_error(at_root, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("   \n"))
    assert run("wikify", "--offline") == 64


def test_wikify_unknown_text_offline_is_fatal(at_root, capsys):
    assert run("wikify", "--text", "never recorded", "--offline") == 1
    assert "offline cache miss" in capsys.readouterr().err


# ----------------------------------------------------------- cache


def _stats(capsys, cache_dir, *extra) -> dict[str, int]:
    capsys.readouterr()
    assert run("cache", "stats", "--cache-dir", cache_dir, *extra) == 0
    return {k: int(v) for k, v in (l.split("\t") for l in capsys.readouterr().out.splitlines())}


def test_cache_stats_match_manifest(fixture_cache_copy, capsys):
    manifest = json.loads((FIXTURES / "manifest.json").read_text())
    stats = _stats(capsys, fixture_cache_copy)
    assert stats.pop("total") == sum(manifest["cache_entries"].values())
    assert stats == manifest["cache_entries"]


def test_cache_clear_scoped_then_all(fixture_cache_copy, capsys):
    manifest = json.loads((FIXTURES / "manifest.json").read_text())["cache_entries"]
    assert run("cache", "clear", "--source", "media_event", "--cache-dir", fixture_cache_copy) == 0
    stats = _stats(capsys, fixture_cache_copy)
    assert stats.get("media_event", 0) == 0
    assert stats["kg_entity"] == manifest["kg_entity"] and stats["dataset"] == manifest["dataset"]
    assert run("cache", "clear", "--cache-dir", fixture_cache_copy) == 0
    assert _stats(capsys, fixture_cache_copy)["total"] == 0
    assert _stats(capsys, fixture_cache_copy, "--source", "kg_entity") == {"kg_entity": 0, "total": 0}


def test_cache_unwritable_dir_is_fatal(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run("cache", "clear", "--cache-dir", blocker) == 1


def test_module_entry_point(at_root):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "xai_enrich", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("xai-enrich ")
