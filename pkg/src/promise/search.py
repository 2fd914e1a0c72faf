"""Retrieval-grounded beam search over proof states."""
from __future__ import annotations

import json
import logging
import math
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Sequence

from .candidates import Candidate, TimeoutRules, parse_llm_output, prepare_candidates
from .config import SearchConfig
from .llm import Backend, BackendUnavailable, BudgetExceeded, GenerationRequest
from .names import InventoryConfig, assemble_inventory
from .prompt import MethodStats, build_prompt, derive_plan, goal_family, rank_methods, summarize_failures
from .prover import ErrorClass, ProofState, Prover, StepResult, UnknownTheorem
from .retrieval import StructWeights, structural_retrieval
from .trace_index import TraceIndex, parse_goal

log = logging.getLogger(__name__)

PROGRESS_WEIGHT = 0.25
LENGTH_PENALTY = 0.01


class FailReason(str, Enum):
    BEAM_EXHAUSTED = "beam_exhausted"
    DEPTH_EXHAUSTED = "depth_exhausted"
    REGEN_EXHAUSTED = "regen_exhausted"
    BUDGET_EXHAUSTED = "budget_exhausted"


def progress_gain(k_parent: int, k_child: int) -> int:
    if k_parent < 0 or k_child < 0:
        raise ValueError("subgoal counts must be non-negative")
    return max(0, k_parent - k_child)


def diversification_reward(family: str, stats: MethodStats, gamma_w: float, gamma_cap: float) -> float:
    if gamma_w < 0 or gamma_cap < 0:
        raise ValueError("gamma values must be non-negative")
    return min(gamma_cap, gamma_w / (1.0 + math.sqrt(stats.u(family))))


def beam_score(k_child: int, L: int, delta: int, b: float) -> float:
    return -k_child - LENGTH_PENALTY * L + PROGRESS_WEIGHT * delta + b


@dataclass(frozen=True)
class BeamNode:
    prefix: tuple[str, ...]
    state: ProofState
    depth: int = 0
    score: float = 0.0
    last_delta: int = 0
    ancestors: tuple[str, ...] = ()

    @property
    def goal_text(self) -> str:
        return self.state.goal_text

    @property
    def assumptions(self) -> list[str]:
        return self.state.assumption_texts

    @property
    def subgoal_count(self) -> int:
        return self.state.subgoal_count

    @property
    def fingerprint(self) -> str:
        return self.state.fingerprint

    def child(self, commands: Sequence[str], state: ProofState, score: float, delta: int) -> "BeamNode":
        return BeamNode(self.prefix + tuple(commands), state, self.depth + 1, score, delta,
                        self.ancestors + (self.fingerprint,))


def makes_progress(parent: BeamNode, result: StepResult) -> bool:
    fp = result.state.fingerprint
    return fp != parent.fingerprint and fp not in parent.ancestors


def task_signature(parent: BeamNode, cand: Candidate) -> str:
    return parent.state.fingerprint + "§" + cand.dedupe_key


class MemoCache:
    """Signature -> StepResult, first writer wins."""

    def __init__(self):
        self._data: dict[str, StepResult] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> StepResult | None:
        with self._lock:
            return self._data.get(key)

    def put(self, key: str, result: StepResult) -> StepResult:
        with self._lock:
            return self._data.setdefault(key, result)

    def __len__(self) -> int:
        return len(self._data)


@dataclass
class SearchStats:
    llm_queries: int = 0
    prover_probes: int = 0
    cache_hits: int = 0
    max_depth_reached: int = 0
    wall_time: float = 0.0

    def to_dict(self, wall_time: bool = True) -> dict:
        d = {"llm_queries": self.llm_queries, "prover_probes": self.prover_probes,
             "cache_hits": self.cache_hits, "max_depth_reached": self.max_depth_reached}
        if wall_time:
            d["wall_time"] = self.wall_time
        return d


@dataclass
class Proved:
    script: list[str]
    stats: SearchStats
    status = "proved"


@dataclass
class Failed:
    reason: FailReason
    stats: SearchStats
    status = "failed"


SearchOutcome = Proved | Failed


@dataclass
class Qed:
    script: list[str]


@dataclass
class Fail:
    pass


@dataclass
class Next:
    nodes: list[BeamNode]


GenOutcome = Qed | Fail | Next


class SearchLog:
    """JSON-lines event sink; keeps events in memory and optionally streams them to a file."""

    def __init__(self, stream: IO[str] | None = None):
        self.events: list[dict] = []
        self._stream = stream
        self._lock = threading.Lock()

    def emit(self, **event) -> None:
        with self._lock:
            self.events.append(event)
            if self._stream is not None:
                self._stream.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")

    def probes(self) -> list[dict]:
        return [e for e in self.events if e.get("type") == "probe"]

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for e in self.events:
                fh.write(json.dumps(e, ensure_ascii=False, sort_keys=True) + "\n")


@dataclass
class WindowStats:
    probes: int = 0
    timeouts: int = 0
    gains: int = 0

    @property
    def timeout_rate(self) -> float:
        return self.timeouts / self.probes if self.probes else 0.0

    @property
    def progress_rate(self) -> float:
        return self.gains / self.probes if self.probes else 0.0


@dataclass
class LiveBudget:
    B: int
    C: int
    C0: int
    stagnant: int = 0


def adapt_budgets(live: LiveBudget, timeout_rate: float, progress_rate: float,
                  pressure: float = 0.5, stagnation_depths: int = 2) -> LiveBudget:
    """Shrink under timeout pressure; widen C after consecutive depths without subgoal progress."""
    if not (0.0 <= timeout_rate <= 1.0 and 0.0 <= progress_rate <= 1.0):
        raise ValueError("rates must lie in [0, 1]")
    stagnant = live.stagnant + 1 if progress_rate == 0 else 0
    if timeout_rate > pressure:
        return LiveBudget(max(2, live.B - 1), max(4, math.floor(0.75 * live.C)), live.C0, stagnant)
    if stagnant >= stagnation_depths:
        return LiveBudget(live.B, min(2 * live.C0, math.ceil(1.25 * live.C)), live.C0, 0)
    return LiveBudget(live.B, live.C, live.C0, stagnant)


@dataclass
class _NodeContext:
    prompt: str
    inventory: object
    plan: object


class BeamSearch:
    """One search per target; the prover, index and backend are injected."""

    def __init__(self, prover: Prover, index: TraceIndex, backend: Backend, cfg: SearchConfig | None = None,
                 method_stats: MethodStats | None = None, search_log: SearchLog | None = None,
                 memo: MemoCache | None = None):
        self.prover = prover
        self.index = index
        self.backend = backend
        self.cfg = cfg or SearchConfig()
        self.method_stats = method_stats or MethodStats.from_index(index)
        self.log = search_log or SearchLog()
        self.memo = memo if memo is not None else MemoCache()
        self.stats = SearchStats()
        self._weights = StructWeights(self.cfg.alpha, self.cfg.beta, self.cfg.c_max)
        self._inv_cfg = InventoryConfig(dict(self.cfg.inventory_caps), self.cfg.ngram_k)
        self._rules = TimeoutRules(self.cfg.max_add_names, self.cfg.max_repeat_nesting)

    # -- per-node context ---------------------------------------------------

    def _context(self, node: BeamNode, target: str, target_statement: str, C: int,
                 errors: list[tuple[str, str, str]]) -> _NodeContext:
        cfg = self.cfg
        templates = structural_retrieval(self.index, node.goal_text, target, target_statement, self.prover,
                                         self._weights, cfg.shortlist_k, cfg.template_n,
                                         cfg.max_templates_per_theorem)
        inventory = assemble_inventory(node.goal_text, node.state, self.prover, target, self._inv_cfg)
        ranked = rank_methods(goal_family(parse_goal(node.goal_text)), templates, self.method_stats)
        plan = derive_plan(ranked, C)
        prompt = build_prompt(node, templates, inventory, summarize_failures(errors), plan)
        self.log.emit(type="context", depth=node.depth + 1, parent_fingerprint=node.fingerprint,
                      templates=[{"source_theorem": t.source_theorem, "steps": list(t.steps)}
                                 for t in templates],
                      inventory=inventory.to_dict(), prompt_bytes=len(prompt.encode("utf-8")))
        return _NodeContext(prompt, inventory, plan)

    def _verify(self, node: BeamNode, cand: Candidate) -> tuple[StepResult, bool]:
        key = task_signature(node, cand)
        if self.cfg.memoize:
            hit = self.memo.get(key)
            if hit is not None:
                self.stats.cache_hits += 1
                return hit, True
        self.stats.prover_probes += 1
        result = self.prover.run_commands(node.state, list(cand.commands), self.cfg.probe_timeout)
        if self.cfg.memoize:
            result = self.memo.put(key, result)
        return result, False

    def _generate(self, prompt: str, C: int) -> list[str]:
        req = GenerationRequest(prompt, C, self.cfg.temperature, self.cfg.max_tokens, self.cfg.seed)
        self.stats.llm_queries += 1
        try:
            texts = self.backend.generate(req).texts
        except BackendUnavailable as exc:
            log.warning("backend unavailable: %s", exc)
            return []
        raws: list[str] = []
        for text in texts:
            raws.extend(parse_llm_output(text, C))
        return raws[:C]

    # -- algorithm ----------------------------------------------------------

    def command_generator(self, frontier: Sequence[BeamNode], target: str, live: LiveBudget,
                          window: WindowStats) -> GenOutcome:
        if not 1 <= len(frontier) <= max(live.B, 1):
            raise ValueError("frontier size out of range")
        target_statement = self.prover.theorem_statement(target)
        seen: dict[str, set[str]] = {}
        errors: dict[int, list[tuple[str, str, str]]] = {}
        best: dict[str, tuple] = {}
        for _round in range(self.cfg.regen_limit):
            for pos, node in enumerate(frontier):
                ctx = self._context(node, target, target_statement, live.C, errors.get(pos, []))
                raws = self._generate(ctx.prompt, live.C)
                node_seen = seen.setdefault(node.fingerprint, set())
                batch = prepare_candidates(raws, ctx.inventory, target, node_seen, self.prover.methods,
                                           live.C, ctx.plan, self.cfg.fallbacks, self._rules)
                errors[pos] = []
                depth = node.depth + 1
                for raw, why in batch.rejected:
                    self.log.emit(type="probe", depth=depth, parent_fingerprint=node.fingerprint,
                                  command=raw, outcome="rejected", score=None, cache_hit=False,
                                  reject_reason=why.reason.value)
                for cand in batch.accepted:
                    node_seen.add(cand.dedupe_key)
                    result, hit = self._verify(node, cand)
                    if not hit:
                        window.probes += 1
                        window.timeouts += result.error_class is ErrorClass.TIMEOUT
                    event = dict(type="probe", depth=depth, parent_fingerprint=node.fingerprint,
                                 command=cand.dedupe_key, outcome=result.outcome, score=None,
                                 cache_hit=hit, reject_reason=None, provenance=cand.provenance.value)
                    if result.outcome == "error":
                        errors[pos].append((cand.dedupe_key, result.error_class.value, result.message))
                        self.log.emit(**event, error_class=result.error_class.value)
                        continue
                    if result.outcome == "closed":
                        script = list(node.prefix + cand.commands)
                        if self.prover.whole_theory_check(target, script):
                            self.log.emit(**event)
                            return Qed(script)
                        self.log.emit(**{**event, "reject_reason": "whole_theory_check_failed"})
                        continue
                    if not makes_progress(node, result):
                        self.log.emit(**{**event, "reject_reason": "no_progress"})
                        continue
                    delta = progress_gain(node.subgoal_count, result.state.subgoal_count)
                    if not hit:
                        window.gains += delta > 0
                    b = diversification_reward(cand.first_method, self.method_stats,
                                               self.cfg.gamma_w, self.cfg.gamma_cap)
                    L = len(node.prefix) + len(cand.commands)
                    score = beam_score(result.state.subgoal_count, L, delta, b)
                    self.method_stats.record_success(cand.first_method)
                    self.log.emit(**{**event, "score": score, "child_fingerprint": result.state.fingerprint})
                    child = node.child(cand.commands, result.state, score, delta)
                    key = (-score, pos, cand.dedupe_key)
                    fp = result.state.fingerprint
                    if fp not in best or key < best[fp][0]:
                        best[fp] = (key, child)
            if best:
                ranked = sorted(best.values(), key=lambda kv: kv[0])
                return Next([child for _, child in ranked[: live.B]])
        return Fail()

    def search(self, target: str) -> SearchOutcome:
        start = time.perf_counter()
        try:
            return self._search(target)
        finally:
            self.stats.wall_time = time.perf_counter() - start

    def _search(self, target: str) -> SearchOutcome:
        cfg = self.cfg
        root_state = self.prover.probe_initial_state(target)  # raises UnknownTheorem
        frontier = [BeamNode((), root_state)]
        root_k = root_state.subgoal_count
        live = LiveBudget(cfg.beam_width, cfg.candidate_budget, cfg.candidate_budget)
        limit = cfg.depth_bound
        depth = 0
        while True:
            depth += 1
            self.stats.max_depth_reached = depth
            window = WindowStats()
            try:
                out = self.command_generator(frontier, target, live, window)
            except BudgetExceeded:
                return Failed(FailReason.BUDGET_EXHAUSTED, self.stats)
            if isinstance(out, Qed):
                return Proved(out.script, self.stats)
            if isinstance(out, Fail):
                return Failed(FailReason.BEAM_EXHAUSTED, self.stats)
            frontier = out.nodes
            if cfg.adapt_budgets:
                live = adapt_budgets(live, window.timeout_rate, window.progress_rate,
                                     cfg.timeout_pressure, cfg.stagnation_depths)
                frontier = frontier[: live.B]
            if depth >= limit:
                promising = any(n.last_delta > 0 or n.subgoal_count < root_k for n in frontier)
                if depth < cfg.hard_cap and promising:
                    limit += 1
                    continue
                return Failed(FailReason.DEPTH_EXHAUSTED, self.stats)


def search(target: str, prover: Prover, index: TraceIndex, backend: Backend,
           cfg: SearchConfig | None = None, **kwargs) -> SearchOutcome:
    return BeamSearch(prover, index, backend, cfg, **kwargs).search(target)


__all__ = [
    "BeamNode", "BeamSearch", "Fail", "FailReason", "Failed", "MemoCache", "Next", "Proved", "Qed",
    "SearchLog", "SearchStats", "UnknownTheorem", "adapt_budgets", "beam_score", "diversification_reward",
    "makes_progress", "progress_gain", "search", "task_signature",
]
