"""Grounded vocabulary of fact names, assembled from four sources and bucketed by role."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

from . import terms
from .prover import LOGICAL_CONSTANTS, ProofState, Prover
from .trace_index import GoalFeatures, parse_goal

WP_TOKENS = frozenset({"wp", "valid", "invs", "hoare", "refine"})
DEFAULT_CAP = 12
DEFAULT_NGRAM_K = 24


class Role(str, Enum):
    DEFINITION = "Definition"
    SIMP = "Simp"
    RULE = "Rule"
    WP = "WP"


PLACEHOLDER = {
    Role.DEFINITION: "<Def/Simp names>",
    Role.SIMP: "<Def/Simp names>",
    Role.RULE: "<Rule lemma>",
    Role.WP: "<WP/refinement lemma>",
}


def _name_parts(name: str) -> set[str]:
    return {p.lower() for p in re.split(r"[_.']+", name) if p}


def classify_role(name: str, statement_text: str = "") -> Role:
    """``_def`` suffix, then WP vocabulary, then bare equation, else rule-style."""
    if name.endswith("_def"):
        return Role.DEFINITION
    words = _name_parts(name)
    for tok in terms.lexical_tokens(statement_text):
        words |= _name_parts(tok)
    if words & WP_TOKENS:
        return Role.WP
    try:
        t = terms.parse_term(statement_text)
    except terms.TermSyntaxError:
        return Role.RULE
    prems, concl = terms.split_premises(t)
    if not prems and concl.head == "=" and len(concl.args) == 2:
        return Role.SIMP
    return Role.RULE


@dataclass(frozen=True)
class NameInventory:
    definitions: tuple[str, ...] = ()
    simp_facts: tuple[str, ...] = ()
    rule_facts: tuple[str, ...] = ()
    wp_facts: tuple[str, ...] = ()

    @property
    def all(self) -> frozenset[str]:
        return frozenset(self.definitions + self.simp_facts + self.rule_facts + self.wp_facts)

    def bucket(self, role: Role) -> tuple[str, ...]:
        return {
            Role.DEFINITION: self.definitions,
            Role.SIMP: self.simp_facts,
            Role.RULE: self.rule_facts,
            Role.WP: self.wp_facts,
        }[role]

    def to_dict(self) -> dict:
        return {"definitions": list(self.definitions), "simp": list(self.simp_facts),
                "rules": list(self.rule_facts), "wp": list(self.wp_facts)}


def _identifiers(goal: GoalFeatures) -> list[str]:
    """Constants and identifiers of a goal, in a stable order."""
    idents = {tok for tok, _ in goal.tokens if re.match(r"^[A-Za-z_]", tok)}
    idents |= {c for c in goal.constants if re.match(r"^[A-Za-z_]", c)}
    idents -= LOGICAL_CONSTANTS
    return sorted(idents)


def implicit_names_from_goal(goal: GoalFeatures) -> list[str]:
    out = []
    for ident in _identifiers(goal):
        out.extend([ident, ident + "_def"])
    return out


def _trigrams(text: str) -> Counter:
    return Counter(text[i:i + 3] for i in range(len(text) - 2))


def ngram_retrieve(corpus: Mapping[str, str], goal_text: str, k: int) -> list[str]:
    """Rank ``name -> statement`` entries by character-trigram cosine against the goal."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = _trigrams(goal_text)
    qn = math.sqrt(sum(v * v for v in q.values()))
    scored = []
    for name, statement in corpus.items():
        d = _trigrams(f"{name} {statement}")
        dn = math.sqrt(sum(v * v for v in d.values()))
        dot = sum(q[g] * d[g] for g in q.keys() & d.keys())
        scored.append((dot / (qn * dn) if qn and dn else 0.0, name))
    scored.sort(key=lambda x: (-x[0], x[1]))
    return [name for _, name in scored[:k]]


def live_search(goal: GoalFeatures, state: ProofState | None, prover: Prover) -> list[str]:
    """Interactive fact search over each non-logical goal constant, ranked by hit count."""
    hits: Counter = Counter()
    for c in sorted(goal.constants - LOGICAL_CONSTANTS):
        for name in prover.search_facts(c, state):
            hits[name] += 1
    return [name for name, _ in sorted(hits.items(), key=lambda x: (-x[1], x[0]))]


def def_candidates(goal: GoalFeatures, state: ProofState | None, prover: Prover) -> list[str]:
    """Schema ``c_def`` names for goal constants plus context-provided definitions, verified."""
    out: list[str] = []
    for ident in _identifiers(goal):
        cand = ident + "_def"
        if cand not in out and prover.check_fact_exists(cand):
            out.append(cand)
    for cand in prover.context_definitions(state):
        if cand not in out and prover.check_fact_exists(cand):
            out.append(cand)
    return out


def base_name(name: str) -> str:
    """Strip theory qualifiers, attribute brackets and selection indices."""
    name = re.sub(r"\[.*\]$", "", name)
    name = re.sub(r"\(\d+\)$", "", name)
    return name.rsplit(".", 1)[-1]


def is_alias_of(name: str, target: str) -> bool:
    return base_name(name) == target


@dataclass
class InventoryConfig:
    caps: dict[str, int] = field(default_factory=lambda: {r.value: DEFAULT_CAP for r in Role})
    ngram_k: int = DEFAULT_NGRAM_K


def assemble_inventory(goal_text: str, state: ProofState | None, prover: Prover, target: str,
                       config: InventoryConfig | None = None) -> NameInventory:
    config = config or InventoryConfig()
    goal = parse_goal(goal_text)
    corpus = {n: prover.fact_statement(n) for n in prover.fact_names() if not is_alias_of(n, target)}
    sources: Sequence[Iterable[str]] = (
        live_search(goal, state, prover),
        def_candidates(goal, state, prover),
        implicit_names_from_goal(goal),
        ngram_retrieve(corpus, goal_text, config.ngram_k) if corpus else [],
    )
    buckets: dict[Role, list[str]] = {r: [] for r in Role}
    seen: set[str] = set()
    for source in sources:
        for name in source:
            if name in seen:
                continue
            seen.add(name)
            if is_alias_of(name, target) or not prover.check_fact_exists(name):
                continue
            role = classify_role(name, prover.fact_statement(name))
            if len(buckets[role]) < config.caps.get(role.value, DEFAULT_CAP):
                buckets[role].append(name)
    # final safety pass against self-reference
    for role in Role:
        buckets[role] = [n for n in buckets[role] if not is_alias_of(n, target) and n != target]
    return NameInventory(tuple(buckets[Role.DEFINITION]), tuple(buckets[Role.SIMP]),
                         tuple(buckets[Role.RULE]), tuple(buckets[Role.WP]))
