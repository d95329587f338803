"""Precision@K and ratio-of-diverse-entries (RDE@K) over enriched explanations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import AbstractSet, Any, Iterable, Mapping, Sequence

from .errors import JudgmentGapError, ValidationError
from .model import EnrichedExplanation, read_jsonl


class Section(str, Enum):
    MEDIA_EVENTS = "media_events"
    MEDIA_KEYWORDS_CONCEPTS = "media_keywords_concepts"
    DATASETS = "datasets"
    KG = "kg"


SECTION_TITLES = {
    Section.MEDIA_EVENTS: "Media Events",
    Section.MEDIA_KEYWORDS_CONCEPTS: "Media Events' Keywords & Concepts",
    Section.DATASETS: "External Datasets",
    Section.KG: "Knowledge Graph",
}

NO_DATA = "no data"

Judgments = dict[tuple[str, Section], dict[str, bool]]


def section_ids(e: EnrichedExplanation, section: Section) -> list[str]:
    """Ranked identifiers shown for one section of an explanation."""
    section = Section(section)
    if section is Section.MEDIA_EVENTS:
        return [r.candidate_id for r in e.ranked_media]
    if section is Section.MEDIA_KEYWORDS_CONCEPTS:
        return [cid for cid, _ in e.emergent_concepts]
    if section is Section.DATASETS:
        return [r.candidate_id for r in e.ranked_datasets]
    return [r.candidate_id for r in e.ranked_kg]


def load_judgments(path) -> Judgments:
    out: Judgments = {}
    for i, row in enumerate(read_jsonl(path), 1):
        try:
            key = (str(row["explanation_id"]), Section(row["section"]))
            cid = str(row["candidate_id"])
            relevant = row["relevant"]
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"{path}:{i}: bad judgment row ({exc})") from None
        if not isinstance(relevant, bool):
            raise ValidationError(f"{path}:{i}: 'relevant' must be a boolean")
        bucket = out.setdefault(key, {})
        if cid in bucket:
            raise ValidationError(f"{path}:{i}: duplicate judgment for {key[0]}/{key[1].value}/{cid}")
        bucket[cid] = relevant
    return out


def _entry_id(entry: Any) -> str:
    if isinstance(entry, str):
        return entry
    if isinstance(entry, tuple):
        return entry[0]
    return entry.candidate_id


def _unjudged(top: Sequence[str], judged: Mapping[str, bool] | AbstractSet[str]) -> list[str]:
    if isinstance(judged, AbstractSet):
        return []
    return [cid for cid in top if cid not in judged]


def precision_at_k(ranked: Sequence[Any], judgments: Mapping[str, bool] | AbstractSet[str], k: int, *,
                   strict: bool = True) -> Fraction | None:
    """Relevant share of the first ``min(k, n)`` entries; ``None`` for an empty list.

    ``judgments`` is either ``{candidate_id: relevant}`` or a set of relevant
    ids. With a mapping and ``strict``, an unjudged entry in the top-K is an
    error; otherwise it counts as not relevant.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    top = [_entry_id(e) for e in ranked[:k]]
    if not top:
        return None
    if strict:
        missing = _unjudged(top, judgments)
        if missing:
            raise JudgmentGapError([("", "", cid) for cid in missing])
    if isinstance(judgments, AbstractSet):
        hits = sum(1 for cid in top if cid in judgments)
    else:
        hits = sum(1 for cid in top if judgments.get(cid, False))
    return Fraction(hits, len(top))


def average_precision_at_k(enriched: Sequence[EnrichedExplanation], section: Section, judgments: Judgments,
                           k: int, *, strict: bool = True) -> Fraction | None:
    """Mean per-explanation precision@k; explanations with an empty section are skipped."""
    section = Section(section)
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    missing: list[tuple[str, str, str]] = []
    values = []
    for e in enriched:
        ids = section_ids(e, section)
        if not ids:
            continue
        judged = judgments.get((e.explanation.explanation_id, section), {})
        gaps = _unjudged(ids[:k], judged)
        if strict and gaps:
            missing.extend((e.explanation.explanation_id, section.value, cid) for cid in gaps)
            continue
        values.append(precision_at_k(ids, judged, k, strict=False))
    if missing:
        raise JudgmentGapError(missing)
    if not values:
        return None
    return sum(values, Fraction(0)) / len(values)


def _pool(enriched: Iterable[EnrichedExplanation], section: Section, k: int) -> list[str]:
    pool = []
    for e in enriched:
        pool.extend(section_ids(e, section)[:k])
    return pool


def rde_at_k(enriched: Sequence[EnrichedExplanation], section: Section, k: int) -> Fraction | None:
    """Distinct ids over total ids among every explanation's top-k entries."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    pool = _pool(enriched, Section(section), k)
    if not pool:
        return None
    return Fraction(len(set(pool)), len(pool))


@dataclass(frozen=True)
class ReportRow:
    section: Section
    k: int
    average_precision: Fraction | None
    rde: Fraction | None
    explanations_evaluated: int
    total_listed_entries: int
    unique_entries: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "section": self.section.value,
            "k": self.k,
            "average_precision": _num(self.average_precision),
            "average_precision_exact": _exact(self.average_precision),
            "rde": _num(self.rde),
            "rde_exact": _exact(self.rde),
            "explanations_evaluated": self.explanations_evaluated,
            "total_listed_entries": self.total_listed_entries,
            "unique_entries": self.unique_entries,
        }


def _num(v: Fraction | None) -> float | None:
    return None if v is None else float(v)


def _exact(v: Fraction | None) -> str | None:
    return None if v is None else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class EvaluationReport:
    label: str
    total_explanations: int
    ks: tuple[int, ...]
    rows: tuple[ReportRow, ...] = field(default_factory=tuple)

    def row(self, section: Section | str, k: int) -> ReportRow:
        section = Section(section)
        for r in self.rows:
            if r.section is section and r.k == k:
                return r
        raise KeyError((section, k))

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "total_explanations": self.total_explanations,
            "ks": list(self.ks),
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def build_report(enriched: Sequence[EnrichedExplanation], judgments: Judgments, ks: Sequence[int], *,
                 strict: bool = True, label: str = "semantic",
                 sections: Sequence[Section] = tuple(Section)) -> EvaluationReport:
    if not ks:
        raise ValidationError("at least one K is required")
    if any(k < 1 for k in ks):
        raise ValidationError("every K must be >= 1")
    ks = tuple(dict.fromkeys(ks))
    rows = []
    gaps: list[tuple[str, str, str]] = []
    for section in sections:
        for k in ks:
            try:
                ap = average_precision_at_k(enriched, section, judgments, k, strict=strict)
            except JudgmentGapError as exc:
                gaps.extend(exc.missing)
                continue
            pool = _pool(enriched, section, k)
            rows.append(ReportRow(
                section=Section(section),
                k=k,
                average_precision=ap,
                rde=rde_at_k(enriched, section, k),
                explanations_evaluated=sum(1 for e in enriched if section_ids(e, section)),
                total_listed_entries=len(pool),
                unique_entries=len(set(pool)),
            ))
    if gaps:
        raise JudgmentGapError(sorted(set(gaps)))
    return EvaluationReport(label, len(enriched), ks, tuple(rows))


# ---------------------------------------------------------------- rendering


def table_rows(reports: Sequence[EvaluationReport]) -> list[list[str]]:
    """Section x metric rows, one value column per report."""
    header = ["section", "metric", *[r.label for r in reports]]
    ks = sorted({k for r in reports for k in r.ks})
    lines = [header]
    for section in Section:
        for metric in ("Average Precision", "RDE"):
            for k in ks:
                values = []
                present = False
                for rep in reports:
                    try:
                        row = rep.row(section, k)
                    except KeyError:
                        values.append("NA")
                        continue
                    present = True
                    v = row.average_precision if metric == "Average Precision" else row.rde
                    values.append(NO_DATA if v is None else f"{float(v):.4f}")
                if present:
                    lines.append([SECTION_TITLES[section], f"{metric}@{k}", *values])
    return lines


def render_tsv(reports: Sequence[EvaluationReport]) -> str:
    return "".join("\t".join(row) + "\n" for row in table_rows(reports))


def render_text(reports: Sequence[EvaluationReport]) -> str:
    rows = table_rows(reports)
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    out = []
    for n, row in enumerate(rows):
        cells = [c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))]
        out.append("  ".join(cells).rstrip())
        if n == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"
