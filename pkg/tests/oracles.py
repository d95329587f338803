"""Independent brute-force reference implementations used by the tests."""

from __future__ import annotations

from fractions import Fraction


def brute_jaccard(a, b) -> Fraction:
    a, b = list(dict.fromkeys(a)), list(dict.fromkeys(b))
    inter = 0
    for x in a:
        for y in b:
            if x == y:
                inter += 1
                break
    union = len(a) + len(b) - inter
    return Fraction(1) if union == 0 else Fraction(inter, union)


def precedes(ref, x, y) -> bool:
    """True when candidate x must be listed before candidate y."""
    dx, dy = 1 - brute_jaccard(ref, x.concepts), 1 - brute_jaccard(ref, y.concepts)
    if dx != dy:
        return dx < dy
    sx, sy = x.source_score, y.source_score
    if sx != sy:
        if sx is None:
            return False
        if sy is None:
            return True
        return sx > sy
    return x.candidate_id < y.candidate_id


def brute_rank(ref, candidates) -> list[tuple[str, int, Fraction]]:
    """Rank = 1 + number of candidates that precede it, by pairwise comparison."""
    out = []
    for x in candidates:
        ahead = sum(1 for y in candidates if y is not x and precedes(ref, y, x))
        out.append((x.candidate_id, ahead + 1, 1 - brute_jaccard(ref, x.concepts)))
    return sorted(out, key=lambda t: t[1])


def brute_precision(top_ids, relevant) -> Fraction:
    hits = 0
    for cid in top_ids:
        for r in relevant:
            if cid == r:
                hits += 1
                break
    return Fraction(hits, len(top_ids))


def brute_rde(pool) -> Fraction:
    unique = 0
    for i, x in enumerate(pool):
        if all(pool[j] != x for j in range(i)):
            unique += 1
    return Fraction(unique, len(pool))
