import math
import re
from collections import Counter

import pytest

from promise.candidates import Candidate
from promise.config import SearchConfig
from promise.llm import ScriptedBackend
from promise.prompt import MethodStats
from promise.prover import ToyProver, ToyTheory, UnknownTheorem
from promise.search import (BeamNode, BeamSearch, Fail, FailReason, Failed, LiveBudget, MemoCache, Next,
                            Proved, Qed, SearchLog, WindowStats, adapt_budgets, beam_score,
                            diversification_reward, makes_progress, progress_gain, task_signature)
from promise.trace_index import build_index

NO_FRILLS = dict(fallbacks=False, adapt_budgets=False)


def listing(*cmds):
    return "\n".join(f"{i}. {c}" for i, c in enumerate(cmds, 1))


def exact(goal):
    return "^" + re.escape(goal) + "$"


class CountingProver:
    """Delegates to a prover and counts probes per (state fingerprint, commands)."""

    def __init__(self, inner):
        self._inner = inner
        self.calls = Counter()

    def run_commands(self, state, cmds, budget=None):
        self.calls[(state.fingerprint, tuple(cmds))] += 1
        return self._inner.run_commands(state, cmds, budget)

    def __getattr__(self, name):
        return getattr(self._inner, name)


# scoring

@pytest.mark.parametrize("kp,kc,want", [(3, 1, 2), (2, 5, 0), (4, 4, 0)])
def test_progress_gain(kp, kc, want):
    assert progress_gain(kp, kc) == want


def test_progress_gain_rejects_negative():
    with pytest.raises(ValueError):
        progress_gain(-1, 0)


def test_diversification_reward():
    fresh = MethodStats()
    assert diversification_reward("simp", fresh, 0.2, 0.15) == pytest.approx(0.15, abs=1e-9)
    used = MethodStats(usage={"simp": 3})
    assert diversification_reward("simp", used, 0.2, 0.15) == pytest.approx(0.2 / (1 + math.sqrt(3)), abs=1e-9)
    assert diversification_reward("simp", used, 0.2, 0.15) == pytest.approx(0.0732, abs=1e-4)
    for u in range(5):
        assert diversification_reward("rule", MethodStats(usage={"rule": u}), 0.0, 0.15) == 0.0


def test_beam_score_examples():
    assert beam_score(1, 4, 2, 0.0) == pytest.approx(-0.54, abs=1e-9)
    assert beam_score(1, 1, 0, 0.0) == pytest.approx(-1.01, abs=1e-9)
    assert beam_score(2, 3, 2, 0.1) - beam_score(2, 3, 0, 0.1) == pytest.approx(0.5, abs=1e-9)


# adaptation

def test_adapt_under_timeouts():
    live = adapt_budgets(LiveBudget(6, 12, 12), 0.6, 0.0)
    assert (live.B, live.C) == (5, 9)


def test_adapt_floors():
    live = adapt_budgets(LiveBudget(2, 4, 12), 0.9, 0.0)
    assert (live.B, live.C) == (2, 4)


def test_adapt_healthy_unchanged():
    live = adapt_budgets(LiveBudget(6, 12, 12), 0.1, 0.5)
    assert (live.B, live.C) == (6, 12)


def test_adapt_stagnation_widens():
    live = adapt_budgets(LiveBudget(6, 12, 12), 0.0, 0.0)
    assert live.C == 12 and live.stagnant == 1
    live = adapt_budgets(live, 0.0, 0.0)
    assert live.C == 15 <= 24
    for _ in range(10):
        live = adapt_budgets(live, 0.0, 0.0)
    assert live.C == 24


def test_adapt_rejects_bad_rates():
    with pytest.raises(ValueError):
        adapt_budgets(LiveBudget(6, 12, 12), 1.5, 0.0)


# progress and memo keys

def osc_prover():
    return ToyProver(ToyTheory.from_dict({
        "sorts": [{"name": "bool", "constructors": ["True", "False"], "variables": ["b"]}],
        "rules": [{"name": "swap", "lhs": "foo x", "rhs": "goo x"},
                  {"name": "unswap", "lhs": "goo x", "rhs": "foo x"}],
        "definitions": [{"name": "hoo_def", "lhs": "hoo x", "rhs": "foo x"}],
        "theorems": [{"name": "t", "statement": "pp (hoo b)", "script": []},
                     {"name": "u", "statement": "∀y. pp (hoo y)", "script": []},
                     {"name": "w", "statement": "∀z. pp (hoo z)", "script": []}],
    }))


def test_makes_progress_cases():
    p = osc_prover()
    root = BeamNode((), p.probe_initial_state("t"))
    same = p.apply_command(root.state, "apply simp")
    assert same.outcome != "progressed" or not makes_progress(root, same)
    r1 = p.apply_command(root.state, "apply (unfold hoo_def)")
    assert r1.state.subgoal_count == root.subgoal_count
    assert makes_progress(root, r1)
    n1 = root.child(["apply (unfold hoo_def)"], r1.state, 0.0, 0)
    r2 = p.apply_command(n1.state, "apply (simp add: swap)")
    assert makes_progress(n1, r2)
    n2 = n1.child(["apply (simp add: swap)"], r2.state, 0.0, 0)
    r3 = p.apply_command(n2.state, "apply (simp add: unswap)")
    assert r3.state.fingerprint == n1.fingerprint
    assert not makes_progress(n2, r3)


def test_task_signature():
    p = osc_prover()
    t = BeamNode((), p.probe_initial_state("u"))
    u = BeamNode((), p.probe_initial_state("w"))
    assert t.fingerprint == u.fingerprint  # alpha-equivalent goals
    a, b = Candidate.of(["apply  simp"]), Candidate.of(["apply simp"])
    assert task_signature(t, a) == task_signature(u, b)
    other = BeamNode((), p.probe_initial_state("t"))
    assert task_signature(t, a) != task_signature(other, a)


def test_memo_cache_first_writer_wins():
    memo = MemoCache()
    assert memo.put("k", "first") == "first"
    assert memo.put("k", "second") == "first"
    assert memo.get("k") == "first" and len(memo) == 1


# command generator

def generator(prover, index, table, **cfg):
    backend = ScriptedBackend(table)
    bs = BeamSearch(prover, index, backend, SearchConfig(**{**NO_FRILLS, **cfg}))
    return bs, backend


def test_generator_qed(prover, index):
    bs, _ = generator(prover, index, {exact("a + 0 = a"): [listing("apply (simp add: add_zero)")]})
    root = BeamNode((), prover.probe_initial_state("add_zero_thm"))
    out = bs.command_generator([root], "add_zero_thm", LiveBudget(6, 4, 4), WindowStats())
    assert isinstance(out, Qed) and out.script == ["apply (simp add: add_zero)"]


def test_generator_fail_counts_generations(prover, index):
    C, R = 4, 2
    bad = listing(*(f"apply (rule ghost{i})" for i in range(C)))
    bs, backend = generator(prover, index, {".*": [bad]}, regen_limit=R)
    root = BeamNode((), prover.probe_initial_state("add_zero_thm"))
    out = bs.command_generator([root], "add_zero_thm", LiveBudget(6, C, C), WindowStats())
    assert isinstance(out, Fail)
    assert backend.queries == R * 1
    assert sum(len(c["texts"]) for c in backend.call_log) == R
    attempted = [e for e in bs.log.probes()]
    assert len(attempted) == R * C * 1


def test_generator_keeps_top_b(index):
    # nine rewrites of the goal with distinct subgoal structure; keep the six best
    facts = [{"name": f"split{i}", "premises": [f"qq{j}" for j in range(i + 1)], "conclusion": "pp tt"}
             for i in range(9)]
    prover = ToyProver(ToyTheory.from_dict({
        "sorts": [], "rules": [], "facts": facts, "definitions": [],
        "theorems": [{"name": "goal", "statement": "pp tt", "script": []}],
    }))
    cmds = [f"apply (rule split{i})" for i in range(9)]
    bs = BeamSearch(prover, build_index(prover), ScriptedBackend({".*": [listing(*cmds)]}),
                    SearchConfig(candidate_budget=9, inventory_caps={"Definition": 20, "Simp": 20, "Rule": 20,
                                                                     "WP": 20}, **NO_FRILLS))
    root = BeamNode((), prover.probe_initial_state("goal"))
    out = bs.command_generator([root], "goal", LiveBudget(6, 9, 9), WindowStats())
    assert isinstance(out, Next)
    scored = sorted((e["score"] for e in bs.log.probes() if e["score"] is not None), reverse=True)
    assert len(scored) == 9
    assert [n.score for n in out.nodes] == scored[:6]
    assert [n.subgoal_count for n in out.nodes] == [1, 2, 3, 4, 5, 6]


def test_generator_rejects_oversized_frontier(prover, index):
    bs, _ = generator(prover, index, {})
    root = BeamNode((), prover.probe_initial_state("add_zero_thm"))
    with pytest.raises(ValueError):
        bs.command_generator([root] * 3, "add_zero_thm", LiveBudget(2, 4, 4), WindowStats())


# whole search

def test_two_step_proof(prover, index):
    table = {exact("double 0 = 0"): [listing("apply (unfold double_def)")],
             exact("0 + 0 = 0"): [listing("apply (simp add: add_zero)")]}
    bs, _ = generator(prover, index, table)
    out = bs.search("double_zero")
    assert isinstance(out, Proved)
    assert out.script == ["apply (unfold double_def)", "apply (simp add: add_zero)"]
    assert prover.whole_theory_check("double_zero", out.script)
    assert out.stats.llm_queries == 2 and out.stats.prover_probes == 2


def test_depth_exhausted(prover, index):
    table = {exact("double 0 = 0"): [listing("apply (unfold double_def)")],
             exact("0 + 0 = 0"): [listing("apply (simp add: add_zero)")]}
    bs, _ = generator(prover, index, table, depth_bound=1, hard_cap=1)
    out = bs.search("double_zero")
    assert isinstance(out, Failed) and out.reason is FailReason.DEPTH_EXHAUSTED


def test_empty_backend(prover, index):
    bs, _ = generator(prover, index, {})
    out = bs.search("double_zero")
    assert isinstance(out, Failed) and out.reason is FailReason.BEAM_EXHAUSTED
    assert out.stats.max_depth_reached == 1
    with_fb = BeamSearch(prover, index, ScriptedBackend({}), SearchConfig(adapt_budgets=False)).search("double_zero")
    assert isinstance(with_fb, Proved)
    assert prover.whole_theory_check("double_zero", with_fb.script)


def test_budget_exhausted(prover, index):
    backend = ScriptedBackend({}, query_cap=1)
    out = BeamSearch(prover, index, backend, SearchConfig(**NO_FRILLS)).search("double_zero")
    assert isinstance(out, Failed) and out.reason is FailReason.BUDGET_EXHAUSTED


def test_unknown_theorem(prover, index):
    with pytest.raises(UnknownTheorem):
        BeamSearch(prover, index, ScriptedBackend({})).search("no_such_theorem")


def memo_table():
    x = "Suc (n + n) = Suc (n + n)"
    return {
        exact("inc (double n) = Suc (n + n)"): [listing("apply (unfold inc_def double_def)", "apply (unfold inc_def)")],
        exact("Suc (double n) = Suc (n + n)"): [listing("apply (unfold double_def)")],
        exact(x): [listing("apply (rule suc_cong)")],
    }


def test_memoization_shares_probes(prover, index):
    counting = CountingProver(prover)
    log = SearchLog()
    bs = BeamSearch(counting, index, ScriptedBackend(memo_table()),
                    SearchConfig(depth_bound=3, hard_cap=3, **NO_FRILLS), search_log=log)
    out = bs.search("inc_double")
    assert isinstance(out, Failed)
    assert max(counting.calls.values()) == 1
    assert out.stats.cache_hits >= 1
    hits = [e for e in log.probes() if e["cache_hit"]]
    assert any(e["command"] == "apply (rule suc_cong)" for e in hits)


def test_memo_off_reprobes(prover, index):
    counting = CountingProver(prover)
    bs = BeamSearch(counting, index, ScriptedBackend(memo_table()),
                    SearchConfig(depth_bound=3, hard_cap=3, memoize=False, **NO_FRILLS))
    out = bs.search("inc_double")
    assert out.stats.cache_hits == 0
    assert max(counting.calls.values()) == 2


def test_log_events_are_complete(prover, index):
    log = SearchLog()
    bs = BeamSearch(prover, index, ScriptedBackend(memo_table()),
                    SearchConfig(depth_bound=3, hard_cap=3, **NO_FRILLS), search_log=log)
    bs.search("inc_double")
    for e in log.probes():
        assert {"depth", "parent_fingerprint", "command", "outcome", "score", "cache_hit",
                "reject_reason"} <= set(e)
    assert any(e["type"] == "context" and e["prompt_bytes"] > 0 for e in log.events)
