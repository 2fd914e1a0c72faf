import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from promise.retrieval import (
    EmptyIndex, StructWeights, abstract_template, rerank, rerank_score,
    retrieve_shortlist, scored_shortlist, select_templates, struct_formula, structural_retrieval,
)
from promise.trace_index import TraceIndex, embed_goal, make_record, parse_goal

DIM = 4096


def test_struct_formula_examples():
    for w in (StructWeights(), StructWeights(0.3, 0.7, 2)):
        assert struct_formula(0.0, 0, 0.0, w) == 1.0
    assert struct_formula(0.6, 4, 0.3, StructWeights(0.05, 0.10, 10)) == pytest.approx(0.63, abs=1e-9)
    capped = struct_formula(0.0, 7, 0.0, StructWeights(0.05, 0.0, 3)) - 1.0
    assert capped == pytest.approx(0.15, abs=1e-12)


def test_weights_validation():
    with pytest.raises(ValueError):
        StructWeights(alpha=-1)
    with pytest.raises(ValueError):
        StructWeights(c_max=0)
    with pytest.raises(ValueError):
        StructWeights(beta=float("nan"))


def _idx(goals):
    recs = [make_record(tid, i, g, (), ("apply simp",), DIM) for tid, i, g in goals]
    return TraceIndex(recs, DIM)


def test_shortlist_small_index_and_empty():
    idx = _idx([("t1", 0, "a + 0 = a"), ("t2", 0, "le n n"), ("t3", 0, "even 0"),
                ("t4", 0, "neg b = b"), ("t5", 0, "a + b = c")])
    out = retrieve_shortlist(idx, "a + 0 = a", "target", k=30)
    assert len(out) == 5 and out[0].theorem_id == "t1"
    with pytest.raises(EmptyIndex):
        retrieve_shortlist(_idx([("target", 0, "a = a")]), "a = a", "target")


def _reference_s_struct(query_text, rec, w):
    q = parse_goal(query_text)
    e = embed_goal(q, DIM)
    cos = float(e @ rec.embedding / (np.linalg.norm(e) * np.linalg.norm(rec.embedding)))
    d = min(1.0, max(0.0, (1 - cos) / 2))
    m = len(q.constants & rec.constants)
    a, b = Counter(dict(q.tokens)), Counter(dict(rec.features.tokens))
    lex = sum((a & b).values()) / sum((a | b).values())
    return 1 - d + w.alpha * min(m, w.c_max) + w.beta * lex


def test_planted_near_duplicate_ranks_first(index):
    planted = make_record("zz_planted", 0, "double (Suc (Suc 0)) = Suc (Suc (Suc (Suc 0)))", (), ("apply simp",))
    idx = TraceIndex(list(index.records) + [planted], index.dimension)
    query = "double (Suc (Suc 0)) = Suc (Suc (Suc (Suc 0)))"
    w = StructWeights()
    got = scored_shortlist(idx, query, "none", 30, w)
    assert got[0][0] is planted
    expected = sorted(idx.records, key=lambda r: (-_reference_s_struct(query, r, w), r.theorem_id, r.step_index))
    assert [r for r, _ in got] == expected[:30]
    for r, s in got:
        assert s == pytest.approx(_reference_s_struct(query, r, w), abs=1e-9)


def test_rerank_worked_example():
    assert rerank_score(0.43, 0.15, 0.18) == pytest.approx(0.307, abs=1e-9)
    assert rerank_score(0.34, 0.82, 0.09) == pytest.approx(0.483, abs=1e-9)
    assert rerank_score(0.34, 0.82, 0.09) > rerank_score(0.43, 0.15, 0.18)


def test_rerank_invariants(index):
    goal = "inc (double n) = Suc (n + n)"
    short = scored_shortlist(index, goal, "inc_double")
    out = rerank(short, goal, goal, index)
    for c in out:
        assert c.s_rerank == pytest.approx(rerank_score(c.s_struct, c.s_goal, c.s_const), abs=1e-12)
        assert 0.0 <= c.s_goal <= 1.0 and 0.0 <= c.s_const <= 1.0
    shuffled = list(short)
    random.Random(3).shuffle(shuffled)
    assert [c.record for c in rerank(shuffled, goal, goal, index)] == [c.record for c in out]
    bare = rerank([r for r, _ in short], goal, goal, index)
    assert [c.record for c in bare] == [c.record for c in out]


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 0.5))
def test_monotone_in_goal_similarity(s_struct, s_goal, s_const, bump):
    assert rerank_score(s_struct, min(1.0, s_goal + bump), s_const) >= rerank_score(s_struct, s_goal, s_const)


def test_select_template_counts(index, prover):
    goal = "a + 0 = a"
    reranked = rerank(scored_shortlist(index, goal, "add_zero_thm"), goal, goal, index)
    assert len(select_templates(reranked, prover, 8)) == 8
    assert len(select_templates(reranked[:3], prover, 8, None)) == 3
    per = Counter(t.source_theorem for t in select_templates(reranked, prover, 8))
    assert max(per.values()) <= 2


@pytest.mark.parametrize("suffix,expected", [
    (["apply (simp add: add_zero)", "done"], ["apply (simp add: <Def/Simp names>)", "done"]),
    (["apply (rule conj_intro)"], ["apply (rule <Rule lemma>)"]),
    (["apply simp"], ["apply simp"]),
    (["apply (unfold double_def)"], ["apply (unfold <Def/Simp names>)"]),
    (["apply (wp invs_step)"], ["apply (wp <WP/refinement lemma>)"]),
    (["apply (simp add: add_suc add_zero)"], ["apply (simp add: <Def/Simp names>)"]),
])
def test_abstract_template(prover, suffix, expected):
    assert list(abstract_template(suffix, prover).steps) == expected


def test_templates_hide_every_source_name(index, prover):
    names = set(prover.fact_names())
    for rec in index.records:
        t = abstract_template(rec.suffix, prover)
        words = {w for s in t.steps for w in s.replace("(", " ").replace(")", " ").split()}
        assert not words & names


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_leakage_property(index, prover, seed):
    rng = random.Random(seed)
    target = rng.choice(sorted(index.by_theorem))
    goal = rng.choice(index.records).goal_text
    assert all(r.theorem_id != target for r in retrieve_shortlist(index, goal, target))
    ts = structural_retrieval(index, goal, target, prover.theorem_statement(target), prover)
    assert all(t.source_theorem != target for t in ts)
    assert all(target not in s for t in ts for s in t.steps)


def test_only_target_yields_no_templates(prover):
    idx = _idx([("add_zero_thm", 0, "a + 0 = a")])
    assert structural_retrieval(idx, "a + 0 = a", "add_zero_thm", "a + 0 = a", prover) == []
