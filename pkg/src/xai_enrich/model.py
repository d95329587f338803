"""Domain types shared by every stage, plus their JSON codecs.

All types are frozen; collections are stored as tuples or frozensets so
values can be shared freely between threads.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Iterable, Mapping
from urllib.parse import quote, unquote

from .errors import ValidationError

WIKI_PAGE_PREFIX = "http://{lang}.wikipedia.org/wiki/"


class Classification(str, Enum):
    PERSON = "person"
    PLACE = "place"
    ORGANIZATION = "organization"
    OTHER = "other"


class SourceKind(str, Enum):
    MEDIA_EVENT = "media_event"
    DATASET = "dataset"
    KG_ENTITY = "kg_entity"


DEFAULT_EXCLUDED = frozenset({Classification.PERSON, Classification.PLACE})


def _trim_char(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


def _normalize_once(raw: str) -> str:
    text = " ".join(raw.casefold().split())
    start, end = 0, len(text)
    while start < end and _trim_char(text[start]):
        start += 1
    while end > start and _trim_char(text[end - 1]):
        end -= 1
    return text[start:end]


def normalize_label(raw: str) -> str:
    """Case-fold, collapse whitespace and trim leading/trailing punctuation.

    >>> normalize_label("  Car   Demand ")
    'car demand'
    """
    current = _normalize_once(raw)
    # casefold is not idempotent for a handful of code points; iterate to a fixed point
    while True:
        nxt = _normalize_once(current)
        if nxt == current:
            return current
        current = nxt


def normalize_concept_id(raw: str) -> str:
    """Canonical form of a concept identifier: trimmed, inner whitespace as '_'."""
    return "_".join(raw.split())


def wiki_concept_id(label: str, lang: str = "en") -> str:
    return WIKI_PAGE_PREFIX.format(lang=lang) + quote(label.strip().replace(" ", "_"), safe="()',_-.:")


def concept_label(concept_id: str) -> str:
    """Human label recovered from a wiki page identifier (or the id itself)."""
    tail = concept_id.rsplit("/wiki/", 1)[-1]
    return unquote(tail).replace("_", " ")


class ConceptSet(frozenset):
    """Set of normalized concept identifiers."""

    def __new__(cls, members: Iterable[str] = ()):
        normalized = []
        for m in members:
            cid = normalize_concept_id(m)
            if not cid:
                raise ValidationError("concept_id must be non-empty")
            normalized.append(cid)
        return super().__new__(cls, normalized)

    @property
    def members(self) -> frozenset[str]:
        return frozenset(self)

    def __contains__(self, item: object) -> bool:
        if isinstance(item, str):
            item = normalize_concept_id(item)
        return super().__contains__(item)

    def __or__(self, other):  # keep the subtype for unions
        return ConceptSet(frozenset.__or__(self, other))

    def sorted(self) -> list[str]:
        return sorted(self)

    def __repr__(self) -> str:
        return f"ConceptSet({sorted(self)!r})"


@dataclass(frozen=True)
class FeatureKeyword:
    phrase: str
    canonical_id: str = ""

    def __post_init__(self):
        canonical = normalize_label(self.phrase)
        if not canonical:
            raise ValidationError(f"feature keyword {self.phrase!r} normalizes to an empty id")
        if self.canonical_id and self.canonical_id != canonical:
            raise ValidationError(
                f"canonical_id {self.canonical_id!r} does not match phrase {self.phrase!r}"
            )
        object.__setattr__(self, "canonical_id", canonical)


@dataclass(frozen=True)
class WikiConcept:
    concept_id: str
    label: str
    classification: Classification = Classification.OTHER
    salience: float = 1.0

    def __post_init__(self):
        cid = normalize_concept_id(self.concept_id)
        if not cid:
            raise ValidationError("concept_id must be non-empty")
        if not 0.0 <= self.salience <= 1.0:
            raise ValidationError(f"salience {self.salience} outside [0, 1] for {cid}")
        object.__setattr__(self, "concept_id", cid)
        object.__setattr__(self, "classification", Classification(self.classification))


@dataclass(frozen=True)
class EnrichmentCandidate:
    candidate_id: str
    source_kind: SourceKind
    title: str
    body: str = ""
    timestamp: datetime | None = None
    concepts: ConceptSet = field(default_factory=ConceptSet)
    source_score: float | None = None
    # classification/label detail behind `concepts`, used by the person/place filter
    concept_details: tuple[WikiConcept, ...] = ()

    def __post_init__(self):
        if not self.candidate_id:
            raise ValidationError("candidate_id must be non-empty")
        object.__setattr__(self, "source_kind", SourceKind(self.source_kind))
        if not isinstance(self.concepts, ConceptSet):
            object.__setattr__(self, "concepts", ConceptSet(self.concepts))
        object.__setattr__(self, "concept_details", tuple(self.concept_details))


@dataclass(frozen=True)
class ExplanationRecord:
    explanation_id: str
    product_id: str
    period: str
    feature_keywords: tuple[FeatureKeyword, ...]

    def __post_init__(self):
        kws = tuple(k if isinstance(k, FeatureKeyword) else FeatureKeyword(k) for k in self.feature_keywords)
        if not kws:
            raise ValidationError(f"explanation {self.explanation_id!r} has no feature keywords")
        object.__setattr__(self, "feature_keywords", kws)


@dataclass(frozen=True)
class RankedEntry:
    candidate: EnrichmentCandidate
    distance: float
    rank: int

    @property
    def candidate_id(self) -> str:
        return self.candidate.candidate_id


@dataclass(frozen=True)
class EnrichedExplanation:
    explanation: ExplanationRecord
    reference_concepts: ConceptSet
    ranked_media: tuple[RankedEntry, ...] = ()
    emergent_concepts: tuple[tuple[str, int], ...] = ()
    ranked_datasets: tuple[RankedEntry, ...] = ()
    ranked_kg: tuple[RankedEntry, ...] = ()


# ---------------------------------------------------------------- codecs


def _ts_to_json(ts: datetime | None) -> str | None:
    return None if ts is None else ts.isoformat()


def parse_timestamp(raw: str | None) -> datetime | None:
    if not raw:
        return None
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def keyword_to_dict(kw: FeatureKeyword) -> dict[str, Any]:
    return {"phrase": kw.phrase, "canonical_id": kw.canonical_id}


def keyword_from_dict(data: Mapping[str, Any] | str) -> FeatureKeyword:
    if isinstance(data, str):
        return FeatureKeyword(data)
    return FeatureKeyword(data["phrase"], data.get("canonical_id", ""))


def concept_to_dict(c: WikiConcept) -> dict[str, Any]:
    return {
        "concept_id": c.concept_id,
        "label": c.label,
        "classification": c.classification.value,
        "salience": c.salience,
    }


def concept_from_dict(data: Mapping[str, Any]) -> WikiConcept:
    return WikiConcept(
        concept_id=data.get("concept_id") or data["id"],
        label=data["label"],
        classification=Classification(data.get("classification", "other")),
        salience=float(data.get("salience", 1.0)),
    )


def candidate_to_dict(c: EnrichmentCandidate) -> dict[str, Any]:
    return {
        "candidate_id": c.candidate_id,
        "source_kind": c.source_kind.value,
        "title": c.title,
        "body": c.body,
        "timestamp": _ts_to_json(c.timestamp),
        "concepts": c.concepts.sorted(),
        "source_score": c.source_score,
        "concept_details": [concept_to_dict(d) for d in c.concept_details],
    }


def candidate_from_dict(data: Mapping[str, Any]) -> EnrichmentCandidate:
    score = data.get("source_score")
    return EnrichmentCandidate(
        candidate_id=data["candidate_id"],
        source_kind=SourceKind(data["source_kind"]),
        title=data.get("title", ""),
        body=data.get("body", ""),
        timestamp=parse_timestamp(data.get("timestamp")),
        concepts=ConceptSet(data.get("concepts", ())),
        source_score=None if score is None else float(score),
        concept_details=tuple(concept_from_dict(d) for d in data.get("concept_details", ())),
    )


def record_to_dict(r: ExplanationRecord) -> dict[str, Any]:
    return {
        "explanation_id": r.explanation_id,
        "product_id": r.product_id,
        "period": r.period,
        "feature_keywords": [keyword_to_dict(k) for k in r.feature_keywords],
    }


def record_from_dict(data: Mapping[str, Any]) -> ExplanationRecord:
    try:
        return ExplanationRecord(
            explanation_id=str(data["explanation_id"]),
            product_id=str(data["product_id"]),
            period=str(data["period"]),
            feature_keywords=tuple(keyword_from_dict(k) for k in data["feature_keywords"]),
        )
    except KeyError as exc:
        raise ValidationError(f"explanation record missing field {exc.args[0]!r}") from None


def ranked_to_dict(e: RankedEntry) -> dict[str, Any]:
    return {"rank": e.rank, "distance": e.distance, "candidate": candidate_to_dict(e.candidate)}


def ranked_from_dict(data: Mapping[str, Any]) -> RankedEntry:
    return RankedEntry(
        candidate=candidate_from_dict(data["candidate"]),
        distance=float(data["distance"]),
        rank=int(data["rank"]),
    )


def enriched_to_dict(e: EnrichedExplanation) -> dict[str, Any]:
    return {
        "explanation": record_to_dict(e.explanation),
        "reference_concepts": e.reference_concepts.sorted(),
        "ranked_media": [ranked_to_dict(r) for r in e.ranked_media],
        "emergent_concepts": [{"concept_id": c, "count": n} for c, n in e.emergent_concepts],
        "ranked_datasets": [ranked_to_dict(r) for r in e.ranked_datasets],
        "ranked_kg": [ranked_to_dict(r) for r in e.ranked_kg],
    }


def enriched_from_dict(data: Mapping[str, Any]) -> EnrichedExplanation:
    return EnrichedExplanation(
        explanation=record_from_dict(data["explanation"]),
        reference_concepts=ConceptSet(data["reference_concepts"]),
        ranked_media=tuple(ranked_from_dict(r) for r in data.get("ranked_media", ())),
        emergent_concepts=tuple((d["concept_id"], int(d["count"])) for d in data.get("emergent_concepts", ())),
        ranked_datasets=tuple(ranked_from_dict(r) for r in data.get("ranked_datasets", ())),
        ranked_kg=tuple(ranked_from_dict(r) for r in data.get("ranked_kg", ())),
    )


def dumps_line(data: Mapping[str, Any]) -> str:
    """One JSON document on a single line, stable across runs."""
    return json.dumps(data, ensure_ascii=False, allow_nan=False)


def read_jsonl(path) -> list[dict[str, Any]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
    return rows


def write_jsonl(path, rows: Iterable[Mapping[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(dumps_line(row) + "\n")
