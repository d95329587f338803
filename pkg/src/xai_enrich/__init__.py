"""Enrich forecast explanations with ranked news events, dataset metadata and
knowledge-graph entities, and evaluate the result with Precision@K / RDE@K."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    Classification,
    ConceptSet,
    EnrichedExplanation,
    EnrichmentCandidate,
    ExplanationRecord,
    FeatureKeyword,
    RankedEntry,
    SourceKind,
    WikiConcept,
    normalize_label,
)
from .similarity import jaccard_distance, jaccard_index, rank_candidates, top_k  # noqa: E402

__all__ = [
    "Classification",
    "ConceptSet",
    "EnrichedExplanation",
    "EnrichmentCandidate",
    "ExplanationRecord",
    "FeatureKeyword",
    "RankedEntry",
    "SourceKind",
    "WikiConcept",
    "jaccard_distance",
    "jaccard_index",
    "normalize_label",
    "rank_candidates",
    "top_k",
]
