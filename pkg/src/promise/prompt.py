"""Single grounded few-shot prompt per beam node, plus the method-diversity plan it embeds."""
from __future__ import annotations

import json
import math
import re
import threading
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .commands import FAMILIES, METHOD_FAMILY
from .names import WP_TOKENS, NameInventory, _name_parts
from .retrieval import TacticTemplate
from .trace_index import GoalFeatures, TraceIndex

RENDERED_TEMPLATES = 5
FEEDBACK_LIMIT = 400
MAX_NAMED_FACTS = 3
STANDING_WARNING = "avoid context-local pseudo-facts such as assms, this, that, and thesis"

_HEAD_RE = re.compile(r"^\s*apply\s*\(*\s*([A-Za-z_][A-Za-z0-9_']*)")


def command_family(command: str) -> str:
    """Family of a command or template step, tolerant of placeholders."""
    if command.strip() == "done":
        return "struct"
    m = _HEAD_RE.match(command)
    return METHOD_FAMILY.get(m.group(1), "struct") if m else "struct"


class MethodStats:
    """Run-scoped family counters; ``usage`` is shared across nodes and guarded by a lock."""

    def __init__(self, usage: dict[str, int] | None = None, repo_prevalence: dict[str, int] | None = None):
        self.usage: dict[str, int] = {f: 0 for f in FAMILIES}
        self.usage.update(usage or {})
        self.repo_prevalence: dict[str, int] = {f: 0 for f in FAMILIES}
        self.repo_prevalence.update(repo_prevalence or {})
        if any(v < 0 for v in (*self.usage.values(), *self.repo_prevalence.values())):
            raise ValueError("counts must be non-negative")
        self._lock = threading.Lock()

    @classmethod
    def from_index(cls, index: TraceIndex) -> "MethodStats":
        prevalence = Counter(command_family(r.suffix[0]) for r in index.records if r.suffix)
        return cls(repo_prevalence=dict(prevalence))

    def record_success(self, family: str) -> None:
        with self._lock:
            self.usage[family] = self.usage.get(family, 0) + 1

    def u(self, family: str) -> int:
        with self._lock:
            return self.usage.get(family, 0)

    def snapshot(self) -> dict:
        with self._lock:
            return {"usage": dict(sorted(self.usage.items())),
                    "repo_prevalence": dict(sorted(self.repo_prevalence.items()))}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.snapshot(), indent=2, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "MethodStats":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data.get("usage"), data.get("repo_prevalence"))


@dataclass(frozen=True)
class MethodPlan:
    targets: dict[str, int]
    slots: tuple[str, ...]


def goal_family(goal: GoalFeatures) -> str:
    words: set[str] = set()
    for tok, _ in goal.tokens:
        words |= _name_parts(tok)
    if words & WP_TOKENS:
        return "wp"
    if goal.head == "=":
        return "simp"
    if goal.head in ("⟶", "⟹", "∀"):
        return "rule"
    return "struct"


def rank_methods(family: str, templates: Sequence[TacticTemplate], stats: MethodStats) -> list[str]:
    evidence = Counter(command_family(t.steps[0]) for t in templates if t.steps)
    return sorted(FAMILIES, key=lambda f: (f != family, -evidence[f], stats.u(f),
                                           -stats.repo_prevalence.get(f, 0), f))


def derive_plan(ranked: Sequence[str], C: int) -> MethodPlan:
    if C < 1:
        raise ValueError("candidate budget must be >= 1")
    ranked = list(ranked)
    targets = {f: 0 for f in ranked}
    targets[ranked[0]] = math.ceil(C / 2)
    rest = ranked[1:] or ranked[:1]
    for i in range(C - targets[ranked[0]]):
        targets[rest[i % len(rest)]] += 1
    if C >= 4:
        # coverage wins over the half share: take from the top family until nobody is empty
        for f in ranked[1:]:
            if targets[f] == 0 and targets[ranked[0]] > 1:
                targets[f] += 1
                targets[ranked[0]] -= 1
    slots = tuple(ranked[i % len(ranked)] for i in range(C))
    return MethodPlan(targets, slots)


_UNKNOWN_NAME_RE = re.compile(r"unknown fact\W*?'?([A-Za-z_][A-Za-z0-9_.]*)")


def _offending_name(command: str, message: str) -> str | None:
    m = _UNKNOWN_NAME_RE.search(message)
    return m.group(1) if m else None


def summarize_failures(recent_errors: Iterable[tuple[str, str, str]]) -> str:
    """Compact per-class digest of recent failures, always ending with the standing warning."""
    groups: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for command, error_class, message in recent_errors:
        groups[str(getattr(error_class, "value", error_class))].append((command, message))
    lines = []
    for cls in sorted(groups):
        items = groups[cls]
        if cls == "unknown_fact":
            names = []
            for cmd, msg in items:
                name = _offending_name(cmd, msg)
                if name and name not in names:
                    names.append(name)
            shown = ", ".join(names[:MAX_NAMED_FACTS])
            more = f" and {len(names) - MAX_NAMED_FACTS} more" if len(names) > MAX_NAMED_FACTS else ""
            lines.append(f"unknown_fact: {shown}{more}" if names else f"unknown_fact: {len(items)} command(s)")
        else:
            lines.append(f"{cls}: {len(items)} command(s)")
    budget = FEEDBACK_LIMIT - len(STANDING_WARNING) - 1
    kept = []
    for line in lines:
        if sum(len(x) + 1 for x in kept) + len(line) + 1 > budget:
            break
        kept.append(line)
    return "\n".join([*kept, STANDING_WARNING])


class NodeView(Protocol):
    goal_text: str
    assumptions: Sequence[str]
    prefix: Sequence[str]


def _names(names: Sequence[str]) -> str:
    return ", ".join(names) if names else "none"


def build_prompt(node: NodeView, templates: Sequence[TacticTemplate], inventory: NameInventory,
                 feedback: str, plan: MethodPlan) -> str:
    C = len(plan.slots)
    feedback_lines = feedback.splitlines() or [STANDING_WARNING]
    out = [
        "System role: proof engineer working in a small equational calculus with an apply-style prover.",
        f"Task: produce exactly {C} distinct next-step candidates for the goal below, "
        "each of 1-2 commands, written in apply style only.",
        "",
        "Current state",
        f"- Goal: {node.goal_text}",
        f"- Assumptions: {'; '.join(node.assumptions) if node.assumptions else 'none'}",
        f"- Proof prefix: {'; '.join(node.prefix) if node.prefix else 'none'}",
        f"- Feedback: {feedback_lines[0]}",
        *(f"  {line}" for line in feedback_lines[1:]),
        "",
        "Structural retrieval templates",
    ]
    shown = list(templates)[:RENDERED_TEMPLATES]
    out.extend(f"- T{i}: {' -> '.join(t.steps)}" for i, t in enumerate(shown, 1))
    if not shown:
        out.append("- none")
    out += [
        "",
        "Role-partitioned theorem inventory",
        f"- Defs/Simp: {_names(inventory.definitions + inventory.simp_facts)}",
        f"- Rules: {_names(inventory.rule_facts)}",
        f"- WP/Ref.: {_names(inventory.wp_facts)}",
        "",
        "Generation contract",
        "- Grounding: every fact you cite must come from the inventory above; "
        "template placeholders are not names.",
        "- Reasoning: copy a template's shape, fill its placeholders with inventory names, "
        "and prefer steps that shrink or simplify the goal.",
        "- Diversity: " + ", ".join(f"{f} x{n}" for f, n in plan.targets.items() if n)
        + "; slot order " + " ".join(plan.slots) + "; no near-duplicates.",
        f"- Output: a numbered list of exactly {C} lines, one candidate per line, "
        "commands separated by ';'.",
    ]
    return "\n".join(out) + "\n"
