"""Command-line entry point.

Exit codes: 0 success, 1 fatal error, 2 some records failed (collect mode),
64 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .cache import ResponseCache
from .concepts import KeywordConceptMapping, wikify
from .config import RunConfig, load_run_config
from .errors import CacheIOError, ConfigurationError, EnrichError, JudgmentGapError, OfflineCacheMiss
from .evaluation import build_report, load_judgments, render_text, render_tsv
from .model import SourceKind, enriched_from_dict, enriched_to_dict, read_jsonl, record_from_dict, write_jsonl
from .pipeline import PipelineConfig, Sources, enrich_corpus

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2, 64
DEFAULT_LABEL = "semantic"

logger = logging.getLogger("xai_enrich")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ks(raw: str) -> list[int]:
    try:
        ks = [int(p) for p in raw.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid K list {raw!r}") from None
    if not ks or any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError("every K must be a positive integer")
    return ks


def _positive(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {raw!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--offline", action="store_const", const=True, default=None,
                   help="serve every request from the cache/fixtures; never touch the network")
    p.add_argument("--cache-dir")
    p.add_argument("--fixtures", action="append", dest="fixture_dirs",
                   help="read-only fallback cache directory (repeatable)")
    p.add_argument("--min-salience", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xai-enrich", description="Enrich forecast explanations with ranked external knowledge.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("enrich", help="enrich an explanation corpus")
    _common(p)
    p.add_argument("--input", required=True, help="explanations.jsonl")
    p.add_argument("--mapping", required=True, help="keyword -> wiki concept mapping (jsonl)")
    p.add_argument("--out", default="enriched.jsonl")
    p.add_argument("--errors", help="error sidecar (default: errors.jsonl next to --out)")
    p.add_argument("--keyword-cutoff", type=_positive)
    p.add_argument("--media-limit", type=_positive)
    p.add_argument("--dataset-limit", type=_positive)
    p.add_argument("--kg-limit", type=_positive)
    p.add_argument("--top-n", type=_positive)
    p.add_argument("--max-m", type=_positive)
    p.add_argument("--exclude-classes", help="comma-separated classifications to drop (default person,place)")
    p.add_argument("--query-operator", choices=["or", "and"])
    p.add_argument("--kg-emergent-only", action="store_const", const=True, default=None)
    p.add_argument("--keep-reference-in-emergent", action="store_const", const=True, default=None)
    p.add_argument("--parallelism", type=_positive)
    p.add_argument("--fail-fast", action="store_const", const=True, default=None)
    p.set_defaults(func=cmd_enrich)

    p = sub.add_parser("evaluate", help="compute Average Precision@K and RDE@K")
    p.add_argument("--config")
    p.add_argument("--enriched", action="append", required=True, help="enriched.jsonl (repeatable, one column each)")
    p.add_argument("--label", action="append", help="column label per --enriched (single run default: semantic)")
    p.add_argument("--judgments", required=True)
    p.add_argument("--k", type=_ks, default=[1, 3], help="comma-separated K values (default 1,3)")
    p.add_argument("--report-dir", default="report")
    p.add_argument("--lenient", action="store_true", help="treat unjudged entries as not relevant")
    p.add_argument("--figure-format", default="png", choices=["png", "svg", "pdf"])
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("wikify", help="show wiki concepts for a text")
    _common(p)
    p.add_argument("--text", help="text to annotate (default: read stdin)")
    p.set_defaults(func=cmd_wikify)

    p = sub.add_parser("cache", help="inspect or clear the response cache")
    p.add_argument("--config")
    p.add_argument("--cache-dir")
    p.add_argument("action", choices=["stats", "clear"])
    p.add_argument("--source", choices=[*(k.value for k in SourceKind), "wikifier"])
    p.set_defaults(func=cmd_cache)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        name: getattr(args, name, None)
        for name in ("offline", "cache_dir", "fixture_dirs", "min_salience", "keyword_cutoff", "media_limit",
                     "dataset_limit", "kg_limit", "top_n", "max_m", "query_operator", "kg_emergent_only",
                     "parallelism", "fail_fast")
    }
    overrides["excluded_classes"] = getattr(args, "exclude_classes", None)
    if getattr(args, "keep_reference_in_emergent", None):
        overrides["exclude_reference_from_emergent"] = False
    if args.config and not Path(args.config).is_file():
        raise ConfigurationError(f"config file not found: {args.config}")
    return load_run_config(args.config, overrides=overrides)


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"{what} not found: {p}")
    return p


def cmd_enrich(args) -> int:
    run = _run_config(args)
    mapping = KeywordConceptMapping.from_jsonl(_require_file(args.mapping, "mapping file"))
    records = [record_from_dict(r) for r in read_jsonl(_require_file(args.input, "input corpus"))]
    sources = Sources.from_run_config(run)
    result = enrich_corpus(records, mapping, PipelineConfig.from_run_config(run), sources,
                           parallelism=run.parallelism, fail_fast=run.fail_fast)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_jsonl(out, (enriched_to_dict(e) for e in result.enriched))
    print(f"wrote {len(result.enriched)} enriched explanations to {out}")
    if result.errors:
        err_path = Path(args.errors) if args.errors else out.with_name("errors.jsonl")
        write_jsonl(err_path, (f.to_dict() for f in result.errors))
        print(f"{len(result.errors)} explanations failed; see {err_path}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_evaluate(args) -> int:
    run = _run_config(args)
    strict = run.strict_judgments and not args.lenient
    labels = args.label or []
    if len(labels) > len(args.enriched):
        raise UsageError("more --label values than --enriched files")
    judgments = load_judgments(_require_file(args.judgments, "judgments file"))
    reports = []
    for i, path in enumerate(args.enriched):
        enriched = [enriched_from_dict(r) for r in read_jsonl(_require_file(path, "enriched file"))]
        if i < len(labels):
            label = labels[i]
        else:
            label = DEFAULT_LABEL if len(args.enriched) == 1 else Path(path).stem
        reports.append(build_report(enriched, judgments, args.k, strict=strict, label=label))
    report_dir = Path(args.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    if len(reports) == 1:
        (report_dir / "report.json").write_text(reports[0].to_json(), "utf-8")
    else:
        import json
        (report_dir / "report.json").write_text(
            json.dumps([r.to_dict() for r in reports], indent=2) + "\n", "utf-8")
    (report_dir / "report.tsv").write_text(render_tsv(reports), "utf-8")
    if not args.no_figure:
        from .plotting import plot_report

        plot_report(reports, report_dir / f"report.{args.figure_format}")
    sys.stdout.write(render_text(reports))
    return EXIT_OK


def cmd_wikify(args) -> int:
    text = args.text if args.text is not None else sys.stdin.read()
    if not text.strip():
        raise UsageError("no text given (use --text or pipe text on stdin)")
    run = _run_config(args)
    sources = Sources.from_run_config(run)
    for ann in wikify(text, run.min_salience, client=sources.wikifier):
        c = ann.concept
        print(f"{c.label}\t{c.concept_id}\t{c.classification.value}\t{c.salience:.3f}")
    return EXIT_OK


def cmd_cache(args) -> int:
    run = _run_config(args)
    cache = ResponseCache(run.cache_dir)
    if args.action == "clear":
        removed = cache.clear(args.source)
        print(f"removed {removed} entries from {cache.root}")
        return EXIT_OK
    stats = cache.stats()
    if args.source:
        stats = {args.source: stats.get(args.source, 0)}
    for kind in sorted(stats):
        print(f"{kind}\t{stats[kind]}")
    print(f"total\t{sum(stats.values())}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"xai-enrich: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except OfflineCacheMiss as exc:
        print(f"offline cache miss: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except JudgmentGapError as exc:
        print("unjudged entries in strict mode:", file=sys.stderr)
        for eid, section, cid in exc.missing:
            print(f"  {eid}\t{section}\t{cid}", file=sys.stderr)
        return EXIT_FATAL
    except CacheIOError as exc:
        print(f"cache error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except (EnrichError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
