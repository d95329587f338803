"""Wiki concept extraction: wikifier client, keyword mapping, filtering and
emergent-concept counting."""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import AbstractSet, Iterable, Mapping, Sequence

from .errors import ConfigurationError, PayloadDecodeError, UnmappedKeywordError, ValidationError
from .model import (
    DEFAULT_EXCLUDED,
    Classification,
    ConceptSet,
    FeatureKeyword,
    RankedEntry,
    WikiConcept,
    normalize_label,
    read_jsonl,
)
from .transport import Fetcher, HttpRequest

logger = logging.getLogger(__name__)

WIKIFIER_SOURCE = "wikifier"
DEFAULT_MIN_SALIENCE = 0.8
_CLASS_PRIORITY = (Classification.PERSON, Classification.PLACE, Classification.ORGANIZATION)


@dataclass(frozen=True)
class WikifierAnnotation:
    concept: WikiConcept
    mention_span: tuple[int, int]
    support_count: int = 1


class ClassMap:
    """Maps upstream class names (DBpedia types, Wikidata classes) onto
    :class:`Classification`. Person beats place beats organization."""

    def __init__(self, table: Mapping[str, Iterable[str]]):
        self._lookup: dict[str, Classification] = {}
        for cls_name, names in table.items():
            cls = Classification(cls_name)
            for n in names:
                self._lookup[n.casefold()] = cls

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ClassMap":
        if path is None:
            text = resources.files("xai_enrich.data").joinpath("class_map.json").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        return cls(json.loads(text))

    def classify(self, class_names: Iterable[str]) -> Classification:
        found = {self._lookup.get(n.casefold()) for n in class_names}
        for cls in _CLASS_PRIORITY:
            if cls in found:
                return cls
        return Classification.OTHER


class KeywordConceptMapping:
    """Feature keyword (by canonical id) -> the wiki concepts it maps to."""

    def __init__(self, entries: Mapping[str, Sequence[WikiConcept]], *, max_concepts: int | None = 2):
        self.entries: dict[str, tuple[WikiConcept, ...]] = {}
        self.phrases: dict[str, str] = {}
        for key, concepts in entries.items():
            canonical = normalize_label(key)
            concepts = tuple(concepts)
            if not concepts or (max_concepts is not None and len(concepts) > max_concepts):
                raise ValidationError(f"keyword {key!r} maps to {len(concepts)} concepts")
            self.entries[canonical] = concepts
            self.phrases.setdefault(canonical, key)

    @classmethod
    def from_jsonl(cls, path: str | Path, **kwargs) -> "KeywordConceptMapping":
        entries: dict[str, list[WikiConcept]] = {}
        for row in read_jsonl(path):
            try:
                keyword = row["keyword"]
                concepts = [
                    WikiConcept(c["id"], c["label"], Classification(c.get("classification", "other")))
                    for c in row["concepts"]
                ]
            except KeyError as exc:
                raise ValidationError(f"{path}: mapping entry missing field {exc.args[0]!r}") from None
            if normalize_label(keyword) in {normalize_label(k) for k in entries}:
                raise ValidationError(f"{path}: duplicate mapping entry for {keyword!r}")
            entries[keyword] = concepts
        return cls(entries, **kwargs)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, keyword: object) -> bool:
        if isinstance(keyword, FeatureKeyword):
            return keyword.canonical_id in self.entries
        return isinstance(keyword, str) and normalize_label(keyword) in self.entries

    def concepts_for(self, keyword: FeatureKeyword | str, explanation_id: str | None = None) -> tuple[WikiConcept, ...]:
        kw = keyword if isinstance(keyword, FeatureKeyword) else FeatureKeyword(keyword)
        try:
            return self.entries[kw.canonical_id]
        except KeyError:
            raise UnmappedKeywordError(kw.phrase, explanation_id) from None


def mapped_concepts(keywords: Iterable[FeatureKeyword | str], mapping: KeywordConceptMapping,
                    explanation_id: str | None = None) -> list[WikiConcept]:
    """Concepts for ``keywords`` in order, first occurrence of each id kept."""
    out: dict[str, WikiConcept] = {}
    for kw in keywords:
        for c in mapping.concepts_for(kw, explanation_id):
            out.setdefault(c.concept_id, c)
    return list(out.values())


def map_feature_keywords(keywords: Iterable[FeatureKeyword | str], mapping: KeywordConceptMapping) -> ConceptSet:
    return ConceptSet(c.concept_id for c in mapped_concepts(keywords, mapping))


def filter_concepts(concepts: Iterable[WikiConcept],
                    excluded: AbstractSet[Classification] = DEFAULT_EXCLUDED) -> list[WikiConcept]:
    return [c for c in concepts if c.classification not in excluded]


def emergent_concepts(ranked_media: Sequence[RankedEntry], top_n: int = 10, max_m: int = 5,
                      reference: AbstractSet[str] = frozenset(), *,
                      excluded: AbstractSet[Classification] = DEFAULT_EXCLUDED,
                      exclude_reference: bool = True) -> list[tuple[str, int]]:
    """Most frequent concepts across the ``top_n`` best media events.

    Each event counts a concept at most once. Concepts whose recorded
    classification is excluded are skipped, as are reference concepts
    unless ``exclude_reference`` is off.
    """
    if top_n < 1 or max_m < 1:
        raise ValidationError("top_n and max_m must be >= 1")
    reference = ConceptSet(reference)
    counts: Counter[str] = Counter()
    for entry in ranked_media[:top_n]:
        cand = entry.candidate
        blocked = {d.concept_id for d in cand.concept_details if d.classification in excluded}
        for cid in cand.concepts:
            if cid in blocked or (exclude_reference and cid in reference):
                continue
            counts[cid] += 1
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered[:max_m]


# ---------------------------------------------------------------- wikifier


def parse_wikifier_response(payload: bytes, text: str, class_map: ClassMap, lang: str = "en") -> list[WikifierAnnotation]:
    """Decode a wikifier ``annotate-article`` response.

    Salience is the annotation's PageRank divided by the largest PageRank in
    the response, which puts the strongest annotation at 1.0.
    """
    try:
        doc = json.loads(payload)
    except (ValueError, UnicodeDecodeError) as exc:
        raise PayloadDecodeError(WIKIFIER_SOURCE, "<root>", str(exc)) from None
    raw = doc.get("annotations") if isinstance(doc, dict) else None
    if not isinstance(raw, list):
        raise PayloadDecodeError(WIKIFIER_SOURCE, "annotations")
    ranks = []
    for i, ann in enumerate(raw):
        pr = ann.get("pageRank")
        if not isinstance(pr, (int, float)) or pr < 0:
            raise PayloadDecodeError(WIKIFIER_SOURCE, f"annotations[{i}].pageRank")
        ranks.append(float(pr))
    top = max(ranks, default=0.0)
    out = []
    for i, (ann, pr) in enumerate(zip(raw, ranks)):
        for key in ("title", "url"):
            if not isinstance(ann.get(key), str) or not ann[key]:
                raise PayloadDecodeError(WIKIFIER_SOURCE, f"annotations[{i}].{key}")
        class_names = list(ann.get("dbPediaTypes") or [])
        class_names += [c.get("enLabel", "") for c in ann.get("wikiDataClasses") or [] if isinstance(c, dict)]
        support = ann.get("support") or []
        start, end = 0, len(text)
        if support:
            try:
                start, end = int(support[0]["chFrom"]), int(support[0]["chTo"]) + 1
            except (KeyError, TypeError, ValueError):
                raise PayloadDecodeError(WIKIFIER_SOURCE, f"annotations[{i}].support") from None
        if not 0 <= start < end <= len(text):
            raise PayloadDecodeError(WIKIFIER_SOURCE, f"annotations[{i}].support", f"span {start}:{end} outside text")
        concept = WikiConcept(
            concept_id=ann["url"],
            label=ann["title"],
            classification=class_map.classify(class_names),
            salience=pr / top if top > 0 else 0.0,
        )
        out.append(WikifierAnnotation(concept, (start, end), len(support)))
    return out


class WikifierClient:
    """Client for a wikifier.org-style annotation service, routed through the cache."""

    def __init__(self, fetcher: Fetcher, *, endpoint: str | None = None, user_key: str | None = None,
                 lang: str = "en", class_map: ClassMap | None = None):
        self.fetcher = fetcher
        self.endpoint = endpoint
        self.user_key = user_key
        self.lang = lang
        self.class_map = class_map or ClassMap.load()
        if not fetcher.offline and not endpoint:
            raise ConfigurationError("wikifier.endpoint is required in live mode")

    def request_identity(self, text: str) -> dict:
        return {"text": " ".join(text.split()), "lang": self.lang}

    def _request(self, text: str) -> HttpRequest:
        form = {
            "text": text,
            "lang": self.lang,
            "userKey": self.user_key or "",
            "support": "true",
            "ranges": "false",
            "includeCosines": "false",
            "wikiDataClasses": "true",
            "nTopDfValuesToIgnore": "200",
            "nWordsToIgnoreFromList": "200",
        }
        return HttpRequest("POST", self.endpoint or "", form=form)

    def annotate(self, text: str) -> list[WikifierAnnotation]:
        norm = " ".join(text.split())
        payload = self.fetcher.fetch(WIKIFIER_SOURCE, self.request_identity(text), lambda: self._request(norm))
        return parse_wikifier_response(payload, norm, self.class_map, self.lang)


def wikify(text: str, min_salience: float = DEFAULT_MIN_SALIENCE, *, client: WikifierClient) -> list[WikifierAnnotation]:
    """Annotations at or above ``min_salience``, one per concept id.

    Duplicates keep their most salient annotation; output is ordered by
    descending salience then concept id.
    """
    if not text or not text.strip():
        raise ValidationError("cannot wikify empty text")
    if not 0.0 <= min_salience <= 1.0:
        raise ValidationError(f"min_salience {min_salience} outside [0, 1]")
    best: dict[str, WikifierAnnotation] = {}
    for ann in client.annotate(text):
        if ann.concept.salience < min_salience:
            continue
        cur = best.get(ann.concept.concept_id)
        if cur is None or ann.concept.salience > cur.concept.salience:
            best[ann.concept.concept_id] = ann
    return sorted(best.values(), key=lambda a: (-a.concept.salience, a.concept.concept_id))
