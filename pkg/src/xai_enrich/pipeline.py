"""End-to-end enrichment of forecast explanations.

For each explanation: map feature keywords to reference concepts, retrieve
and rank media events, count emergent concepts in the best events, then
retrieve and rank dataset metadata and knowledge-graph entities against
reference plus emergent concepts.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Iterator, Protocol

from .concepts import ClassMap, KeywordConceptMapping, WikifierClient, emergent_concepts, mapped_concepts
from .config import RunConfig
from .connectors import (
    DatasetCatalogConnector,
    KnowledgeGraphConnector,
    MediaEventConnector,
    SourceQuery,
)
from .cache import ResponseCache
from .errors import EnrichError, ValidationError
from .model import (
    DEFAULT_EXCLUDED,
    Classification,
    ConceptSet,
    EnrichedExplanation,
    EnrichmentCandidate,
    ExplanationRecord,
    SourceKind,
)
from .similarity import Ranker, rank_candidates
from .transport import Fetcher, LiveTransport, Transport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    keyword_cutoff: int | None = None  # None: every keyword of the record
    media_limit: int = 25
    dataset_limit: int = 10
    kg_limit: int = 10
    top_n: int = 10
    max_m: int = 5
    min_salience: float = 0.8
    excluded_classes: frozenset[Classification] = DEFAULT_EXCLUDED
    offline: bool = True
    query_operator: str = "or"
    kg_emergent_only: bool = False
    exclude_reference_from_emergent: bool = True

    def __post_init__(self):
        counts = [self.media_limit, self.dataset_limit, self.kg_limit, self.top_n, self.max_m]
        if any(c < 1 for c in counts) or (self.keyword_cutoff is not None and self.keyword_cutoff < 1):
            raise ValidationError("pipeline counts must be >= 1")
        if not 0.0 <= self.min_salience <= 1.0:
            raise ValidationError("min_salience must lie in [0, 1]")
        object.__setattr__(self, "excluded_classes", frozenset(Classification(c) for c in self.excluded_classes))

    @classmethod
    def from_run_config(cls, run: RunConfig) -> "PipelineConfig":
        return cls(
            keyword_cutoff=run.keyword_cutoff,
            media_limit=run.media_limit,
            dataset_limit=run.dataset_limit,
            kg_limit=run.kg_limit,
            top_n=run.top_n,
            max_m=run.max_m,
            min_salience=run.min_salience,
            excluded_classes=frozenset(Classification(c) for c in run.excluded_classes),
            offline=run.offline,
            query_operator=run.query_operator,
            kg_emergent_only=run.kg_emergent_only,
            exclude_reference_from_emergent=run.exclude_reference_from_emergent,
        )


class Source(Protocol):
    def query(self, q: SourceQuery) -> list[EnrichmentCandidate]: ...


@dataclass
class Sources:
    media: Source
    datasets: Source
    kg: Source
    wikifier: WikifierClient | None = None

    @classmethod
    def from_run_config(cls, run: RunConfig, transport: Transport | None = None) -> "Sources":
        cache = ResponseCache(run.cache_dir, fallbacks=run.fixture_dirs)
        if not run.offline and transport is None:
            transport = LiveTransport(min_interval=run.min_interval, max_in_flight=run.max_in_flight)
        fetcher = Fetcher(cache, transport, offline=run.offline)
        wikifier = WikifierClient(
            fetcher,
            endpoint=run.wikifier_endpoint,
            user_key=run.wikifier_user_key,
            lang=run.wikifier_lang,
            class_map=ClassMap.load(run.class_map),
        )
        common = dict(min_salience=run.min_salience)
        return cls(
            media=MediaEventConnector(fetcher, wikifier, endpoint=run.media_events_endpoint,
                                      api_key=run.ee_api_key, **common),
            datasets=DatasetCatalogConnector(fetcher, wikifier, endpoint=run.dataset_catalog_endpoint, **common),
            kg=KnowledgeGraphConnector(fetcher, wikifier, endpoint=run.knowledge_graph_endpoint,
                                       api_key=run.kg_api_key, lang=run.wikifier_lang, **common),
            wikifier=wikifier,
        )


class RecordFailure(EnrichError):
    """An error raised while enriching one explanation, tagged with its id."""

    def __init__(self, explanation_id: str, cause: Exception):
        super().__init__(f"{explanation_id}: {cause}")
        self.explanation_id = explanation_id
        self.cause = cause

    def to_dict(self) -> dict:
        return {
            "explanation_id": self.explanation_id,
            "error_type": type(self.cause).__name__,
            "message": str(self.cause),
        }


def filter_candidate(cand: EnrichmentCandidate, excluded: AbstractSet[Classification]) -> EnrichmentCandidate:
    """Drop concepts of an excluded classification from a candidate."""
    removed = {d.concept_id for d in cand.concept_details if d.classification in excluded}
    if not removed:
        return cand
    return EnrichmentCandidate(
        candidate_id=cand.candidate_id,
        source_kind=cand.source_kind,
        title=cand.title,
        body=cand.body,
        timestamp=cand.timestamp,
        concepts=ConceptSet(c for c in cand.concepts if c not in removed),
        source_score=cand.source_score,
        concept_details=tuple(d for d in cand.concept_details if d.concept_id not in removed),
    )


def build_reference_concepts(rec: ExplanationRecord, mapping: KeywordConceptMapping,
                             cfg: PipelineConfig) -> ConceptSet:
    keywords = rec.feature_keywords if cfg.keyword_cutoff is None else rec.feature_keywords[: cfg.keyword_cutoff]
    return ConceptSet(c.concept_id for c in mapped_concepts(keywords, mapping, rec.explanation_id))


def _retrieve(source: Source, concepts: Iterable[str], kind: SourceKind, limit: int,
              cfg: PipelineConfig) -> list[EnrichmentCandidate]:
    q = SourceQuery(tuple(sorted(concepts)), kind, limit, operator=cfg.query_operator)
    found = [filter_candidate(c, cfg.excluded_classes) for c in source.query(q)]
    for c in found:
        if not c.concepts:
            logger.warning("%s candidate %s has an empty concept set", kind.value, c.candidate_id)
    return found


def enrich_explanation(rec: ExplanationRecord, mapping: KeywordConceptMapping, cfg: PipelineConfig,
                       sources: Sources, *, ranker: Ranker = rank_candidates) -> EnrichedExplanation:
    try:
        reference = build_reference_concepts(rec, mapping, cfg)
        media = _retrieve(sources.media, reference, SourceKind.MEDIA_EVENT, cfg.media_limit, cfg)
        ranked_media = ranker(reference, media)
        emergent = emergent_concepts(
            ranked_media, cfg.top_n, cfg.max_m, reference,
            excluded=cfg.excluded_classes,
            exclude_reference=cfg.exclude_reference_from_emergent,
        )
        anchor = reference | ConceptSet(cid for cid, _ in emergent)
        ranked_datasets = ranker(anchor, _retrieve(sources.datasets, anchor, SourceKind.DATASET, cfg.dataset_limit, cfg))
        kg_concepts = ConceptSet(cid for cid, _ in emergent) if cfg.kg_emergent_only and emergent else anchor
        ranked_kg = ranker(anchor, _retrieve(sources.kg, kg_concepts, SourceKind.KG_ENTITY, cfg.kg_limit, cfg))
    except RecordFailure:
        raise
    except EnrichError as exc:
        raise RecordFailure(rec.explanation_id, exc) from exc
    return EnrichedExplanation(
        explanation=rec,
        reference_concepts=reference,
        ranked_media=tuple(ranked_media),
        emergent_concepts=tuple(emergent),
        ranked_datasets=tuple(ranked_datasets),
        ranked_kg=tuple(ranked_kg),
    )


@dataclass
class CorpusResult:
    enriched: list[EnrichedExplanation] = field(default_factory=list)
    errors: list[RecordFailure] = field(default_factory=list)


def iter_corpus(records: Iterable[ExplanationRecord], mapping: KeywordConceptMapping, cfg: PipelineConfig,
                sources: Sources, *, parallelism: int = 1) -> Iterator[EnrichedExplanation | RecordFailure]:
    """Yield one outcome per record, in input order."""

    def run(rec: ExplanationRecord) -> EnrichedExplanation | RecordFailure:
        try:
            return enrich_explanation(rec, mapping, cfg, sources)
        except RecordFailure as failure:
            return failure

    if parallelism <= 1:
        yield from map(run, records)
        return
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        yield from pool.map(run, records)


def enrich_corpus(records: Iterable[ExplanationRecord], mapping: KeywordConceptMapping, cfg: PipelineConfig,
                  sources: Sources, *, parallelism: int = 1, fail_fast: bool = False) -> CorpusResult:
    result = CorpusResult()
    seen: set[str] = set()
    checked = []
    for rec in records:
        if rec.explanation_id in seen:
            raise ValidationError(f"duplicate explanation_id {rec.explanation_id!r}")
        seen.add(rec.explanation_id)
        checked.append(rec)
    for outcome in iter_corpus(checked, mapping, cfg, sources, parallelism=parallelism):
        if isinstance(outcome, RecordFailure):
            if fail_fast:
                raise outcome
            logger.warning("enrichment failed: %s", outcome)
            result.errors.append(outcome)
        else:
            result.enriched.append(outcome)
    return result
