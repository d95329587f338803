"""Jaccard set similarity and deterministic candidate ranking."""

from __future__ import annotations

from fractions import Fraction
from typing import AbstractSet, Protocol, Sequence

from .errors import DuplicateCandidateError, ValidationError
from .model import ConceptSet, EnrichmentCandidate, RankedEntry


def jaccard_fraction(a: AbstractSet[str], b: AbstractSet[str]) -> Fraction:
    """Exact |a & b| / |a | b|; two empty sets count as identical."""
    union = len(a | b)
    if union == 0:
        return Fraction(1)
    return Fraction(len(a & b), union)


def jaccard_index(a: AbstractSet[str], b: AbstractSet[str]) -> float:
    return float(jaccard_fraction(a, b))


def jaccard_distance(a: AbstractSet[str], b: AbstractSet[str]) -> float:
    return float(1 - jaccard_fraction(a, b))


def _tie_key(candidate: EnrichmentCandidate) -> tuple:
    # descending score with a missing score ranked last, then ascending id
    score = candidate.source_score
    return (0, -score, candidate.candidate_id) if score is not None else (1, 0.0, candidate.candidate_id)


class Ranker(Protocol):
    def __call__(self, reference: ConceptSet, candidates: Sequence[EnrichmentCandidate]) -> list[RankedEntry]: ...


def rank_candidates(reference: AbstractSet[str], candidates: Sequence[EnrichmentCandidate]) -> list[RankedEntry]:
    """Order candidates by Jaccard distance of their concepts to ``reference``.

    Ties fall back to descending ``source_score`` (absent scores last) and
    then ascending ``candidate_id``. Distances are compared as exact
    fractions, so float rounding never reorders entries.
    """
    seen: set[str] = set()
    keyed = []
    for cand in candidates:
        if cand.candidate_id in seen:
            raise DuplicateCandidateError(cand.candidate_id)
        seen.add(cand.candidate_id)
        dist = 1 - jaccard_fraction(reference, cand.concepts)
        keyed.append((dist, _tie_key(cand), cand))
    keyed.sort(key=lambda item: (item[0], item[1]))
    return [RankedEntry(candidate=c, distance=float(d), rank=i) for i, (d, _, c) in enumerate(keyed, 1)]


def top_k(ranked: Sequence[RankedEntry], k: int) -> list[RankedEntry]:
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    return list(ranked[:k])
