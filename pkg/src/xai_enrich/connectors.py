"""Query connectors for the three candidate sources.

* media events: an Event Registry style ``getEvents`` endpoint
* dataset catalog: the data.europa.eu hub search endpoint
* knowledge graph: the Google Knowledge Graph Search API

Every request goes through :class:`~xai_enrich.transport.Fetcher`, keyed by
the hash of the canonical query, so repeated or offline runs replay
byte-identical payloads.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Any, Iterable

from .cache import hash_identity
from .concepts import WikifierClient, wikify
from .errors import ConfigurationError, PayloadDecodeError, ValidationError
from .model import (
    Classification,
    ConceptSet,
    EnrichmentCandidate,
    SourceKind,
    WikiConcept,
    concept_label,
    normalize_concept_id,
    parse_timestamp,
)
from .transport import Fetcher, HttpRequest

logger = logging.getLogger(__name__)

QUERY_OPERATORS = ("or", "and")

_ER_CONCEPT_TYPES = {
    "person": Classification.PERSON,
    "loc": Classification.PLACE,
    "org": Classification.ORGANIZATION,
    "wiki": Classification.OTHER,
}


@dataclass(frozen=True)
class SourceQuery:
    concepts: tuple[str, ...]
    source_kind: SourceKind
    limit: int = 10
    free_text: str | None = None
    operator: str = "or"

    def __post_init__(self):
        object.__setattr__(self, "concepts", tuple(normalize_concept_id(c) for c in self.concepts))
        object.__setattr__(self, "source_kind", SourceKind(self.source_kind))
        if not self.concepts and not (self.free_text and self.free_text.strip()):
            raise ValidationError("query needs at least one concept or free text")
        if not isinstance(self.limit, int) or self.limit < 1:
            raise ValidationError(f"query limit must be >= 1, got {self.limit!r}")
        if self.operator not in QUERY_OPERATORS:
            raise ValidationError(f"unknown query operator {self.operator!r}")

    @property
    def labels(self) -> list[str]:
        return [concept_label(c) for c in sorted(set(self.concepts))]


def canonical_query(q: SourceQuery) -> dict[str, Any]:
    """Order- and whitespace-insensitive encoding used for hashing."""
    return {
        "source_kind": q.source_kind.value,
        "concepts": sorted(set(q.concepts)),
        "free_text": " ".join(q.free_text.split()) if q.free_text else None,
        "limit": q.limit,
        "operator": q.operator,
    }


def query_hash(q: SourceQuery) -> str:
    return hash_identity(canonical_query(q))


def _decode(source: str, payload: bytes) -> Any:
    try:
        return json.loads(payload)
    except (ValueError, UnicodeDecodeError) as exc:
        raise PayloadDecodeError(source, "<root>", str(exc)) from None


def _text(value: Any, *langs: str) -> str:
    """Pick a string out of a plain value or a ``{lang: text}`` mapping."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, dict):
        for lang in langs:
            if isinstance(value.get(lang), str):
                return value[lang]
        for v in value.values():
            if isinstance(v, str):
                return v
    return ""


def candidate_text(*parts: str) -> str:
    """Text sent to the wikifier for a candidate."""
    return "\n".join(p.strip() for p in parts if p and p.strip())


class SourceConnector:
    source_kind: SourceKind
    name: str

    def __init__(self, fetcher: Fetcher, wikifier: WikifierClient, *, endpoint: str | None = None,
                 api_key: str | None = None, min_salience: float = 0.8, require_key: bool = False,
                 key_name: str = ""):
        self.fetcher = fetcher
        self.wikifier = wikifier
        self.endpoint = endpoint
        self.api_key = api_key
        self.min_salience = min_salience
        if not fetcher.offline:
            if not endpoint:
                raise ConfigurationError(f"{self.name}.endpoint is required in live mode")
            if require_key and not api_key:
                raise ConfigurationError(f"{key_name} is not set; {self.name} needs an API key in live mode")

    def query(self, q: SourceQuery) -> list[EnrichmentCandidate]:
        if q.source_kind is not self.source_kind:
            raise ValidationError(f"{self.name} cannot serve {q.source_kind.value} queries")
        out = self._query(q)[: q.limit]
        seen = set()
        for c in out:
            if c.candidate_id in seen:
                raise PayloadDecodeError(self.name, "id", f"duplicate id {c.candidate_id!r}")
            seen.add(c.candidate_id)
        return out

    def _query(self, q: SourceQuery) -> list[EnrichmentCandidate]:
        raise NotImplementedError

    def _keyword_terms(self, q: SourceQuery) -> list[str]:
        terms = q.labels
        if q.free_text and q.free_text.strip():
            terms.append(" ".join(q.free_text.split()))
        return terms

    def _wikified(self, text: str) -> tuple[WikiConcept, ...]:
        if not text.strip():
            return ()
        return tuple(a.concept for a in wikify(text, self.min_salience, client=self.wikifier))


class MediaEventConnector(SourceConnector):
    source_kind = SourceKind.MEDIA_EVENT
    name = "media_events"

    def __init__(self, fetcher, wikifier, **kwargs):
        super().__init__(fetcher, wikifier, require_key=True, key_name="EE_API_KEY", **kwargs)

    def _request(self, q: SourceQuery) -> HttpRequest:
        body = {
            "action": "getEvents",
            "keyword": self._keyword_terms(q),
            "keywordOper": q.operator,
            "resultType": "events",
            "eventsSortBy": "rel",
            "eventsCount": q.limit,
            "includeEventConcepts": True,
            "includeEventSummary": True,
            "apiKey": self.api_key or "",
        }
        return HttpRequest("POST", self.endpoint or "", json_body=body)

    def _query(self, q):
        payload = self.fetcher.fetch(self.source_kind.value, canonical_query(q), lambda: self._request(q))
        doc = _decode(self.name, payload)
        try:
            results = doc["events"]["results"]
        except (KeyError, TypeError):
            raise PayloadDecodeError(self.name, "events.results") from None
        if not isinstance(results, list):
            raise PayloadDecodeError(self.name, "events.results")
        return [self._candidate(i, ev) for i, ev in enumerate(results[: q.limit])]

    def _candidate(self, i: int, ev: dict) -> EnrichmentCandidate:
        uri = ev.get("uri") if isinstance(ev, dict) else None
        if not isinstance(uri, str) or not uri:
            raise PayloadDecodeError(self.name, f"events.results[{i}].uri")
        title = _text(ev.get("title"), "eng", "en")
        body = _text(ev.get("summary"), "eng", "en")
        if "concepts" in ev:
            details = tuple(self._er_concept(i, j, c) for j, c in enumerate(ev["concepts"] or []))
        else:
            details = self._wikified(candidate_text(title, body))
        details = _dedupe(details)
        score = ev.get("wgt")
        return EnrichmentCandidate(
            candidate_id=uri,
            source_kind=self.source_kind,
            title=title,
            body=body,
            timestamp=parse_timestamp(ev.get("eventDate")),
            concepts=ConceptSet(d.concept_id for d in details),
            source_score=float(score) if isinstance(score, (int, float)) else None,
            concept_details=details,
        )

    def _er_concept(self, i: int, j: int, c: Any) -> WikiConcept:
        field = f"events.results[{i}].concepts[{j}]"
        if not isinstance(c, dict) or not isinstance(c.get("uri"), str) or not c["uri"]:
            raise PayloadDecodeError(self.name, field + ".uri")
        ctype = c.get("type", "wiki")
        if ctype not in _ER_CONCEPT_TYPES:
            raise PayloadDecodeError(self.name, field + ".type", f"unknown concept type {ctype!r}")
        score = c.get("score", 100)
        if not isinstance(score, (int, float)):
            raise PayloadDecodeError(self.name, field + ".score")
        return WikiConcept(
            concept_id=c["uri"],
            label=_text(c.get("label"), "eng", "en") or concept_label(c["uri"]),
            classification=_ER_CONCEPT_TYPES[ctype],
            salience=min(max(float(score) / 100.0, 0.0), 1.0),
        )


class DatasetCatalogConnector(SourceConnector):
    source_kind = SourceKind.DATASET
    name = "dataset_catalog"

    def _request(self, q: SourceQuery) -> HttpRequest:
        joiner = " AND " if q.operator == "and" else " OR "
        terms = [f'"{t}"' if " " in t else t for t in self._keyword_terms(q)]
        params = {"q": joiner.join(terms), "filter": "dataset", "limit": q.limit, "page": 0}
        return HttpRequest("GET", self.endpoint or "", params=params)

    def _query(self, q):
        payload = self.fetcher.fetch(self.source_kind.value, canonical_query(q), lambda: self._request(q))
        doc = _decode(self.name, payload)
        try:
            results = doc["result"]["results"]
        except (KeyError, TypeError):
            raise PayloadDecodeError(self.name, "result.results") from None
        if not isinstance(results, list):
            raise PayloadDecodeError(self.name, "result.results")
        out = []
        for i, ds in enumerate(results[: q.limit]):
            ds_id = ds.get("id") if isinstance(ds, dict) else None
            if not isinstance(ds_id, str) or not ds_id:
                raise PayloadDecodeError(self.name, f"result.results[{i}].id")
            title = _text(ds.get("title"), "en")
            if not title:
                raise PayloadDecodeError(self.name, f"result.results[{i}].title")
            description = _text(ds.get("description"), "en")
            publisher = _text((ds.get("publisher") or {}).get("name"), "en") if isinstance(ds.get("publisher"), dict) else ""
            body = description + (f"\nPublisher: {publisher}" if publisher else "")
            details = _dedupe(self._wikified(candidate_text(title, description)))
            out.append(EnrichmentCandidate(
                candidate_id=ds_id,
                source_kind=self.source_kind,
                title=title,
                body=body,
                timestamp=parse_timestamp(ds.get("modified") or ds.get("issued")),
                concepts=ConceptSet(d.concept_id for d in details),
                concept_details=details,
            ))
        return out


class KnowledgeGraphConnector(SourceConnector):
    source_kind = SourceKind.KG_ENTITY
    name = "knowledge_graph"

    def __init__(self, fetcher, wikifier, *, lang: str = "en", **kwargs):
        super().__init__(fetcher, wikifier, require_key=True, key_name="KG_API_KEY", **kwargs)
        self.lang = lang

    def _subqueries(self, q: SourceQuery) -> list[SourceQuery]:
        subs = [SourceQuery((c,), q.source_kind, q.limit) for c in sorted(set(q.concepts))]
        if q.free_text and q.free_text.strip():
            subs.append(SourceQuery((), q.source_kind, q.limit, free_text=q.free_text))
        return subs

    def _request(self, sub: SourceQuery) -> HttpRequest:
        term = sub.labels[0] if sub.concepts else " ".join(sub.free_text.split())
        params = {"query": term, "key": self.api_key or "", "limit": sub.limit, "languages": self.lang, "indent": "false"}
        return HttpRequest("GET", self.endpoint or "", params=params)

    def _query(self, q):
        merged: dict[str, tuple[float, dict]] = {}
        for sub in self._subqueries(q):
            payload = self.fetcher.fetch(self.source_kind.value, canonical_query(sub), lambda s=sub: self._request(s))
            doc = _decode(self.name, payload)
            items = doc.get("itemListElement") if isinstance(doc, dict) else None
            if not isinstance(items, list):
                raise PayloadDecodeError(self.name, "itemListElement")
            for i, item in enumerate(items):
                result = item.get("result") if isinstance(item, dict) else None
                if not isinstance(result, dict) or not isinstance(result.get("@id"), str) or not result["@id"]:
                    raise PayloadDecodeError(self.name, f"itemListElement[{i}].result.@id")
                score = item.get("resultScore", 0.0)
                if not isinstance(score, (int, float)):
                    raise PayloadDecodeError(self.name, f"itemListElement[{i}].resultScore")
                prev = merged.get(result["@id"])
                if prev is None or score > prev[0]:
                    merged[result["@id"]] = (float(score), result)
        best = sorted(merged.items(), key=lambda kv: (-kv[1][0], kv[0]))[: q.limit]
        return [self._candidate(eid, score, result) for eid, (score, result) in best]

    def _candidate(self, eid: str, score: float, result: dict) -> EnrichmentCandidate:
        name = _text(result.get("name"), self.lang)
        if not name:
            raise PayloadDecodeError(self.name, f"result[{eid}].name")
        description = _text(result.get("description"), self.lang)
        article = _text((result.get("detailedDescription") or {}).get("articleBody"), self.lang) \
            if isinstance(result.get("detailedDescription"), dict) else ""
        details = _dedupe(self._wikified(candidate_text(name, description, article)))
        return EnrichmentCandidate(
            candidate_id=eid,
            source_kind=self.source_kind,
            title=name,
            body=candidate_text(description, article),
            concepts=ConceptSet(d.concept_id for d in details),
            source_score=score,
            concept_details=details,
        )


def _dedupe(details: Iterable[WikiConcept]) -> tuple[WikiConcept, ...]:
    best: dict[str, WikiConcept] = {}
    for d in details:
        cur = best.get(d.concept_id)
        if cur is None or d.salience > cur.salience:
            best[d.concept_id] = d
    return tuple(sorted(best.values(), key=lambda d: d.concept_id))
