"""Goal-conditioned structural retrieval: scoring, shortlist, semantic rerank, templates."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .names import PLACEHOLDER, classify_role
from .prover import Prover
from .trace_index import (
    GoalFeatures, TraceIndex, TraceRecord, cosine, distance, embed_goal, parse_goal,
)

SHORTLIST_K = 30
TEMPLATE_N = 8
MAX_PER_THEOREM = 2
RERANK_WEIGHTS = (0.55, 0.35, 0.10)


class EmptyIndex(LookupError):
    pass


@dataclass(frozen=True)
class StructWeights:
    alpha: float = 0.05
    beta: float = 0.10
    c_max: int = 10

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("weights must be finite")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("weights must be non-negative")
        if self.c_max < 1:
            raise ValueError("c_max must be >= 1")


@dataclass(frozen=True)
class Query:
    goal_text: str
    features: GoalFeatures
    embedding: np.ndarray

    @classmethod
    def from_text(cls, goal_text: str, dimension: int) -> "Query":
        feats = parse_goal(goal_text)
        return cls(goal_text, feats, embed_goal(feats, dimension))


@dataclass(frozen=True)
class ScoredCandidate:
    record: TraceRecord
    s_struct: float
    s_goal: float
    s_const: float
    s_rerank: float


@dataclass(frozen=True)
class TacticTemplate:
    steps: tuple[str, ...]
    source_theorem: str = ""
    source_score: float = 0.0


def jaccard(a, b) -> float:
    a, b = set(a), set(b)
    union = a | b
    return len(a & b) / len(union) if union else 0.0


def multiset_jaccard(a: Counter, b: Counter) -> float:
    keys = a.keys() | b.keys()
    top = sum(max(a[k], b[k]) for k in keys)
    if not top:
        return 0.0
    return sum(min(a[k], b[k]) for k in keys) / top


def struct_formula(d: float, m: int, lexical: float, w: StructWeights) -> float:
    return (1.0 - d) + w.alpha * min(m, w.c_max) + w.beta * lexical


def struct_score(query: Query, cand: TraceRecord, w: StructWeights = StructWeights()) -> float:
    d = distance(query.embedding, cand.embedding)
    m = len(query.features.constants & cand.constants)
    lexical = multiset_jaccard(query.features.token_counts, cand.features.token_counts)
    return struct_formula(d, m, lexical, w)


def rerank_score(s_struct: float, s_goal: float, s_const: float) -> float:
    a, b, c = RERANK_WEIGHTS
    return a * s_struct + b * s_goal + c * s_const


def _order_key(score: float, rec: TraceRecord):
    return (-score, rec.theorem_id, rec.step_index)


def scored_shortlist(index: TraceIndex, current_goal: str, target: str, k: int = SHORTLIST_K,
                     weights: StructWeights = StructWeights()) -> list[tuple[TraceRecord, float]]:
    """Top-k ``(record, s_struct)`` pairs; the target theorem's records never enter the pool."""
    pool = [r for r in index.records if r.theorem_id != target]
    if not pool:
        raise EmptyIndex(f"no records outside {target!r}")
    query = Query.from_text(current_goal, index.dimension)
    scored = [(r, struct_score(query, r, weights)) for r in pool]
    scored.sort(key=lambda x: _order_key(x[1], x[0]))
    return scored[:k]


def retrieve_shortlist(index: TraceIndex, current_goal: str, target: str, k: int = SHORTLIST_K,
                       weights: StructWeights = StructWeights()) -> list[TraceRecord]:
    return [r for r, _ in scored_shortlist(index, current_goal, target, k, weights)]


def rerank(shortlist: Sequence[TraceRecord | tuple[TraceRecord, float]], current_goal: str,
           target_statement: str, index: TraceIndex,
           weights: StructWeights = StructWeights()) -> list[ScoredCandidate]:
    """Blend structural, initial-goal and constant similarity into one ordering.

    Entries may be bare records (scored here) or ``(record, s_struct)`` pairs.
    """
    query = Query.from_text(current_goal, index.dimension)
    target_consts = parse_goal(target_statement).constants
    out = []
    for item in shortlist:
        if isinstance(item, tuple):
            rec, s_struct = item
        else:
            rec, s_struct = item, struct_score(query, item, weights)
        init = index.initial_record(rec.theorem_id) or rec
        s_goal = float(np.clip(cosine(query.embedding, init.embedding), 0.0, 1.0))
        s_const = jaccard(target_consts, init.constants)
        out.append(ScoredCandidate(rec, s_struct, s_goal, s_const, rerank_score(s_struct, s_goal, s_const)))
    out.sort(key=lambda c: _order_key(c.s_rerank, c.record))
    return out


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_'.]*")


def abstract_template(suffix: Sequence[str], prover: Prover, source_theorem: str = "",
                      source_score: float = 0.0) -> TacticTemplate:
    """Replace every confirmed fact name with its role placeholder."""
    def swap(m: re.Match) -> str:
        name = m.group(0)
        if prover.check_fact_exists(name):
            return PLACEHOLDER[classify_role(name, prover.fact_statement(name))]
        return name

    steps = []
    for cmd in suffix:
        s = _IDENT_RE.sub(swap, cmd)
        # "a b" -> one placeholder per run
        for ph in set(PLACEHOLDER.values()):
            s = re.sub(rf"{re.escape(ph)}(?:\s+{re.escape(ph)})+", ph, s)
        steps.append(s)
    return TacticTemplate(tuple(steps), source_theorem, source_score)


def select_templates(reranked: Sequence[ScoredCandidate], prover: Prover, n: int = TEMPLATE_N,
                     max_per_theorem: int | None = MAX_PER_THEOREM) -> list[TacticTemplate]:
    out = []
    per_theorem: Counter = Counter()
    for cand in reranked:
        if len(out) >= n:
            break
        tid = cand.record.theorem_id
        if max_per_theorem is not None and per_theorem[tid] >= max_per_theorem:
            continue
        per_theorem[tid] += 1
        out.append(abstract_template(cand.record.suffix, prover, tid, cand.s_rerank))
    return out


def structural_retrieval(index: TraceIndex, current_goal: str, target: str, target_statement: str,
                         prover: Prover, weights: StructWeights = StructWeights(),
                         k: int = SHORTLIST_K, n: int = TEMPLATE_N,
                         max_per_theorem: int | None = MAX_PER_THEOREM) -> list[TacticTemplate]:
    """Shortlist, rerank and abstract; an index holding only the target yields no templates."""
    try:
        shortlist = scored_shortlist(index, current_goal, target, k, weights)
    except EmptyIndex:
        return []
    reranked = rerank(shortlist, current_goal, target_statement, index, weights)
    return select_templates(reranked, prover, n, max_per_theorem)
