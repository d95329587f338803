from __future__ import annotations

import json
import random
from datetime import datetime, timezone
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from xai_enrich.errors import JudgmentGapError, ValidationError
from xai_enrich.evaluation import (
    Section,
    average_precision_at_k,
    build_report,
    load_judgments,
    precision_at_k,
    rde_at_k,
    render_text,
    render_tsv,
    section_ids,
)
from xai_enrich.model import (
    ConceptSet,
    EnrichedExplanation,
    EnrichmentCandidate,
    ExplanationRecord,
    FeatureKeyword,
    RankedEntry,
    SourceKind,
)

from .oracles import brute_precision, brute_rde

T = datetime(2021, 1, 1, tzinfo=timezone.utc)
MEDIA = Section.MEDIA_EVENTS


def entries(ids, kind=SourceKind.MEDIA_EVENT):
    return tuple(RankedEntry(EnrichmentCandidate(c, kind, c, "", T, ConceptSet({"x"})), 0.5, i)
                 for i, c in enumerate(ids, 1))


def explanation(eid, media=(), concepts=(), datasets=(), kg=()):
    return EnrichedExplanation(
        explanation=ExplanationRecord(eid, "P", "2021-01", (FeatureKeyword("Car"),)),
        reference_concepts=ConceptSet({"Car"}),
        ranked_media=entries(media),
        emergent_concepts=tuple((c, 1) for c in concepts),
        ranked_datasets=entries(datasets, SourceKind.DATASET),
        ranked_kg=entries(kg, SourceKind.KG_ENTITY),
    )


def judge(eid, section, **verdicts):
    return {(eid, Section(section)): dict(verdicts)}


# ----------------------------------------------------------- precision


def test_precision_examples():
    assert precision_at_k(entries(["a", "b", "c"]), {"a": True, "b": False, "c": True}, 3) == Fraction(2, 3)
    assert precision_at_k(entries(["a"]), {"a"}, 1) == 1
    assert precision_at_k(entries(["a", "b"]), set(), 3) == 0
    assert precision_at_k([], {"a"}, 3) is None


def test_precision_short_list_uses_list_length():
    assert precision_at_k(["a", "b"], {"a"}, 3) == Fraction(1, 2)


def test_precision_strict_and_lenient():
    judged = {"a": True}
    with pytest.raises(JudgmentGapError, match="b"):
        precision_at_k(["a", "b"], judged, 2)
    assert precision_at_k(["a", "b"], judged, 2, strict=False) == Fraction(1, 2)
    assert precision_at_k(["a", "b"], judged, 1) == 1


def test_precision_rejects_k_zero():
    with pytest.raises(ValidationError):
        precision_at_k(["a"], {"a"}, 0)


@given(st.lists(st.sampled_from("abcdefghijkl"), max_size=10, unique=True), st.sets(st.sampled_from("abcdefghijkl")),
       st.sampled_from([1, 3]))
def test_precision_matches_oracle(ids, relevant, k):
    got = precision_at_k(ids, relevant, k)
    if not ids:
        assert got is None
    else:
        assert got == brute_precision(ids[:k], relevant)


@given(st.lists(st.sampled_from("abcdefgh"), min_size=3, max_size=10, unique=True), st.sets(st.sampled_from("abcdefgh")),
       st.randoms(use_true_random=False))
def test_precision_ignores_entries_below_k(ids, relevant, rnd):
    k = 3
    tail = ids[k:]
    rnd.shuffle(tail)
    assert precision_at_k(ids[:k] + tail[: rnd.randint(0, len(tail))], relevant, k) == precision_at_k(ids, relevant, k)


# ----------------------------------------------------------- average precision


def test_average_precision_is_mean_over_explanations():
    data = [explanation("e1", media=["a"]), explanation("e2", media=["b"])]
    j = {**judge("e1", MEDIA, a=True), **judge("e2", MEDIA, b=False)}
    assert average_precision_at_k(data, MEDIA, j, 1) == Fraction(1, 2)


def test_average_precision_skips_empty_sections_and_reports_no_data():
    data = [explanation("e1", media=["a"]), explanation("e2")]
    assert average_precision_at_k(data, MEDIA, judge("e1", MEDIA, a=True), 1) == 1
    assert average_precision_at_k(data, Section.KG, {}, 1) is None
    assert average_precision_at_k([], MEDIA, {}, 3) is None


def test_average_precision_gap_lists_every_missing_entry():
    data = [explanation("e1", media=["a", "b"]), explanation("e2", media=["c"])]
    with pytest.raises(JudgmentGapError) as info:
        average_precision_at_k(data, MEDIA, judge("e1", MEDIA, a=True), 3)
    assert sorted(info.value.missing) == [("e1", "media_events", "b"), ("e2", "media_events", "c")]
    assert average_precision_at_k(data, MEDIA, judge("e1", MEDIA, a=True), 3, strict=False) == Fraction(1, 4)


def test_keywords_and_concepts_section_uses_emergent_list():
    e = explanation("e1", concepts=["Battery", "Tesla"])
    assert section_ids(e, Section.MEDIA_KEYWORDS_CONCEPTS) == ["Battery", "Tesla"]
    j = judge("e1", Section.MEDIA_KEYWORDS_CONCEPTS, Battery=True, Tesla=False)
    assert average_precision_at_k([e], Section.MEDIA_KEYWORDS_CONCEPTS, j, 3) == Fraction(1, 2)


# ----------------------------------------------------------- rde


def test_rde_examples():
    data = [explanation("e1", media=["e1"]), explanation("e2", media=["e1"]), explanation("e3", media=["e2"])]
    assert rde_at_k(data, MEDIA, 1) == Fraction(2, 3)
    distinct = [explanation(f"x{i}", media=[f"m{i}", f"n{i}"]) for i in range(3)]
    assert rde_at_k(distinct, MEDIA, 3) == 1
    assert rde_at_k(distinct, Section.KG, 1) is None


pools = st.lists(st.lists(st.sampled_from("abcdef"), max_size=4, unique=True), max_size=6)


def _corpus(lists):
    return [explanation(f"x{i}", media=ids) for i, ids in enumerate(lists)]


@given(pools, st.sampled_from([1, 2, 3]))
def test_rde_matches_oracle(lists, k):
    pool = [c for ids in lists for c in ids[:k]]
    got = rde_at_k(_corpus(lists), MEDIA, k)
    if not pool:
        assert got is None
    else:
        assert got == brute_rde(pool)
        assert 0 < got <= 1
        assert (got == 1) == (len(set(pool)) == len(pool))


@given(pools, st.randoms(use_true_random=False))
def test_rde_permutation_invariant(lists, rnd):
    shuffled = list(lists)
    rnd.shuffle(shuffled)
    assert rde_at_k(_corpus(lists), MEDIA, 2) == rde_at_k(_corpus(shuffled), MEDIA, 2)


@given(pools.filter(lambda ls: any(ls)), st.data())
def test_adding_duplicate_never_increases_rde(lists, data):
    existing = data.draw(st.sampled_from([c for ids in lists for c in ids[:1]] or ["a"]))
    before = rde_at_k(_corpus(lists), MEDIA, 1)
    after = rde_at_k(_corpus(lists + [[existing]]), MEDIA, 1)
    if before is not None:
        assert after <= before


# ----------------------------------------------------------- judgments file


def test_load_judgments(tmp_path):
    p = tmp_path / "j.jsonl"
    rows = [{"explanation_id": "e1", "candidate_id": "a", "section": "kg", "relevant": True},
            {"explanation_id": "e1", "candidate_id": "b", "section": "kg", "relevant": False}]
    p.write_text("".join(json.dumps(r) + "\n" for r in rows))
    assert load_judgments(p) == {("e1", Section.KG): {"a": True, "b": False}}


@pytest.mark.parametrize("extra, message", [
    ({"explanation_id": "e1", "candidate_id": "a", "section": "kg", "relevant": False}, "duplicate"),
    ({"explanation_id": "e1", "candidate_id": "c", "section": "kg", "relevant": "yes"}, "boolean"),
    ({"explanation_id": "e1", "candidate_id": "c", "section": "tv", "relevant": True}, "bad judgment"),
])
def test_load_judgments_rejects_bad_rows(tmp_path, extra, message):
    p = tmp_path / "j.jsonl"
    base = {"explanation_id": "e1", "candidate_id": "a", "section": "kg", "relevant": True}
    p.write_text(json.dumps(base) + "\n" + json.dumps(extra) + "\n")
    with pytest.raises(ValidationError, match=message):
        load_judgments(p)


# ----------------------------------------------------------- report


def _saturated(data):
    j = {}
    for e in data:
        for s in Section:
            for cid in section_ids(e, s):
                j.setdefault((e.explanation.explanation_id, s), {})[cid] = True
    return j


def test_report_rows_and_counts():
    data = [explanation("e1", media=["a", "b"], concepts=["C"], datasets=["d"], kg=["k"]),
            explanation("e2", media=["a"], kg=["k", "l"])]
    rep = build_report(data, _saturated(data), [1, 3])
    assert [(r.section.value, r.k) for r in rep.rows] == [(s.value, k) for s in Section for k in (1, 3)]
    assert all(r.average_precision == 1 for r in rep.rows)
    media3 = rep.row(MEDIA, 3)
    assert (media3.total_listed_entries, media3.unique_entries, media3.rde) == (3, 2, Fraction(2, 3))
    assert rep.row("datasets", 1).explanations_evaluated == 1
    assert rep.to_dict()["total_explanations"] == 2


def test_report_with_single_k_only_has_k1_rows():
    data = [explanation("e1", media=["a"])]
    rep = build_report(data, _saturated(data), [1])
    assert {r.k for r in rep.rows} == {1}
    assert "@3" not in render_tsv([rep])


def test_report_requires_ks():
    with pytest.raises(ValidationError):
        build_report([], {}, [])
    with pytest.raises(ValidationError):
        build_report([], {}, [0])


def test_empty_report_renders_no_data():
    rep = build_report([], {}, [1, 3])
    assert all(r.average_precision is None and r.rde is None for r in rep.rows)
    tsv = render_tsv([rep])
    assert tsv.count("no data") == 16
    assert "no data" in render_text([rep])


def test_report_strict_gap_propagates_and_lenient_recovers():
    data = [explanation("e1", media=["a"], kg=["k"])]
    with pytest.raises(JudgmentGapError) as info:
        build_report(data, judge("e1", MEDIA, a=True), [1])
    assert info.value.missing == [("e1", "kg", "k")]
    rep = build_report(data, judge("e1", MEDIA, a=True), [1], strict=False)
    assert rep.row(Section.KG, 1).average_precision == 0


def test_report_json_has_exact_fractions():
    data = [explanation("e1", media=["a", "b", "c"])]
    rep = build_report(data, {("e1", MEDIA): {"a": True, "b": False, "c": True}}, [3], strict=False)
    row = json.loads(rep.to_json())["rows"][0]
    assert row["average_precision_exact"] == "2/3"
    assert row["rde_exact"] == "1/1"


def test_tsv_layout_mirrors_sections_and_metrics():
    data = [explanation("e1", media=["a"], concepts=["C"], datasets=["d"], kg=["k"])]
    rep = build_report(data, _saturated(data), [1, 3], label="semantic")
    lines = [l.split("\t") for l in render_tsv([rep]).splitlines()]
    assert lines[0] == ["section", "metric", "semantic"]
    assert [l[:2] for l in lines[1:5]] == [["Media Events", "Average Precision@1"], ["Media Events", "Average Precision@3"],
                                           ["Media Events", "RDE@1"], ["Media Events", "RDE@3"]]
    assert [l[0] for l in lines[1::4]] == ["Media Events", "Media Events' Keywords & Concepts", "External Datasets",
                                           "Knowledge Graph"]


def test_multi_run_columns():
    data = [explanation("e1", media=["a"])]
    a = build_report(data, _saturated(data), [1], label="semantic")
    b = build_report(data, {("e1", MEDIA): {"a": False}}, [1], label="baseline", sections=[MEDIA])
    rows = [l.split("\t") for l in render_tsv([a, b]).splitlines()]
    assert rows[0] == ["section", "metric", "semantic", "baseline"]
    assert rows[1] == ["Media Events", "Average Precision@1", "1.0000", "0.0000"]
    assert "NA" in rows[3]


def test_metric_oracles_random_sample():
    rnd = random.Random(7)
    for _ in range(200):
        ids = rnd.sample("abcdefghij", rnd.randint(1, 10))
        relevant = set(rnd.sample("abcdefghij", rnd.randint(0, 10)))
        k = rnd.choice([1, 3])
        assert precision_at_k(ids, relevant, k) == brute_precision(ids[:k], relevant)
