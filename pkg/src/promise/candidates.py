"""From raw model text to filtered, grounded candidates (plus schema fallbacks)."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import AbstractSet, Iterable, Sequence

from .commands import FACT_METHODS, Command, CommandSyntaxError, parse_command, render_command
from .names import NameInventory, Role, base_name
from .prompt import MethodPlan, command_family

REPAIR_DISTANCE = 2
MAX_COMMANDS = 2

METHOD_ALIASES = {
    "intro": "rule",
    "simp_all": "auto",
    "clarsimp": "simp",
    "force": "auto",
    "fastforce": "auto",
}


class Unrepairable(ValueError):
    pass


class Provenance(str, Enum):
    LLM = "llm"
    FALLBACK = "fallback"


class Reason(str, Enum):
    EMPTY = "empty"
    DUPLICATE = "duplicate"
    IMPLAUSIBLE_SYNTAX = "implausible_syntax"
    UNKNOWN_METHOD = "unknown_method"
    TIMEOUT_PRONE = "timeout_prone"
    UNRESOLVED_TACTIC_VAR = "unresolved_tactic_var"
    UNGROUNDED_FACT = "ungrounded_fact"
    SELF_REFERENCE = "self_reference"


@dataclass(frozen=True)
class RejectReason:
    reason: Reason
    detail: str = ""


@dataclass(frozen=True)
class Candidate:
    commands: tuple[str, ...]
    first_method: str = "struct"
    provenance: Provenance = Provenance.LLM
    dedupe_key: str = ""

    @classmethod
    def of(cls, commands: Iterable[str], provenance: Provenance = Provenance.LLM) -> "Candidate":
        commands = tuple(" ".join(c.split()) for c in commands)
        first = command_family(commands[0]) if commands else "struct"
        return cls(commands, first, provenance, " ; ".join(commands))


@dataclass(frozen=True)
class TimeoutRules:
    max_add_names: int = 8
    max_repeat_nesting: int = 1


# parsing

_FENCE_RE = re.compile(r"^\s*```")
_ITEM_RE = re.compile(r"^\s*(?:\d+\s*[.):]|[-*•])\s?(.*)$")
_COMMANDISH_RE = re.compile(r"\b(apply|by|done)\b")


def _clean_item(s: str) -> str:
    return s.strip().strip("`").strip()


def parse_llm_output(text: str, C: int) -> list[str]:
    """Extract candidate strings from list items, fenced lines and command-like lines."""
    out: list[str] = []
    in_fence = False
    for line in text.splitlines():
        if _FENCE_RE.match(line):
            in_fence = not in_fence
            continue
        m = _ITEM_RE.match(line)
        if m:
            body = _clean_item(m.group(1))
            if not body or _COMMANDISH_RE.search(body):
                out.append(body)
        elif in_fence and line.strip():
            out.append(_clean_item(line))
        elif re.match(r"^\s*`?(apply|by|done)\b", line):
            out.append(_clean_item(line))
    return out[:C]


# normalization

def levenshtein(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def repair_name(name: str, allowed: AbstractSet[str], target: str | None = None) -> str:
    name = base_name(name)
    if name in allowed or name == target:
        return name
    best = min(((levenshtein(name, c), c) for c in allowed), default=None)
    if best is not None and best[0] <= REPAIR_DISTANCE:
        return best[1]
    return name


def _split_commands(text: str) -> list[str]:
    """Split on ``;`` and on top-level apply/by/done keywords."""
    pieces: list[str] = []
    for chunk in text.split(";"):
        depth, start = 0, 0
        for m in re.finditer(r"[()]|\b(?:apply|by|done)\b", chunk):
            tok = m.group(0)
            if tok == "(":
                depth += 1
            elif tok == ")":
                depth -= 1
            elif depth == 0 and m.start() > start:
                pieces.append(chunk[start:m.start()])
                start = m.start()
        pieces.append(chunk[start:])
    return [p.strip() for p in pieces if p.strip()]


def _normalize_command(cmd: str, allowed: AbstractSet[str], target: str | None) -> str:
    try:
        parsed = parse_command(cmd)
    except CommandSyntaxError:
        return cmd
    if parsed.kind == "done":
        return "done"
    method = METHOD_ALIASES.get(parsed.method, parsed.method)
    args = parsed.args
    if method in FACT_METHODS:
        args = tuple(repair_name(a, allowed, target) for a in args)
    sections = tuple((k, tuple(repair_name(w, allowed, target) for w in ws)) for k, ws in parsed.sections)
    return render_command(Command("apply", method, args, sections, parsed.repeat))


def normalize(raw: str, inventory: NameInventory, target: str | None = None) -> Candidate:
    text = re.sub(r"\(\*.*?\*\)", " ", raw, flags=re.S)
    text = " ".join(text.split())
    if not text:
        return Candidate.of(())
    pieces = _split_commands(text)
    heads = [i for i, p in enumerate(pieces) if re.match(r"^(apply|by|done)\b", p)]
    if not heads:
        raise Unrepairable(f"no proof command in {raw!r}")
    commands: list[str] = []
    for p in pieces[heads[0]:]:
        if p.startswith("by"):
            commands.append("apply" + p[2:])
            commands.append("done")
        else:
            commands.append(p)
    allowed = inventory.all
    return Candidate.of(_normalize_command(c, allowed, target) for c in commands)


# filtering

_SCHEMATIC_RE = re.compile(r"\?[A-Za-z_]")


def _outside_quotes(s: str) -> str:
    return re.sub(r'"[^"]*"|\\<open>.*?\\<close>|‹[^›]*›', "", s)


def _refs(cand: Candidate) -> list[str]:
    refs = []
    for c in cand.commands:
        try:
            refs.extend(base_name(r) for r in parse_command(c).fact_refs())
        except CommandSyntaxError:
            pass
    return refs


def reject_reason(cand: Candidate, inventory: NameInventory, target: str | None,
                  seen: AbstractSet[str], methods: AbstractSet[str],
                  rules: TimeoutRules = TimeoutRules()) -> RejectReason | None:
    if not cand.commands:
        return RejectReason(Reason.EMPTY)
    if cand.dedupe_key in seen:
        return RejectReason(Reason.DUPLICATE, cand.dedupe_key)
    parsed = []
    if len(cand.commands) > MAX_COMMANDS:
        return RejectReason(Reason.IMPLAUSIBLE_SYNTAX, f"{len(cand.commands)} commands")
    for c in cand.commands:
        if re.search(r"\b(sorry|oops)\b", c):
            return RejectReason(Reason.IMPLAUSIBLE_SYNTAX, "placeholder proof")
        try:
            parsed.append(parse_command(c))
        except CommandSyntaxError as exc:
            return RejectReason(Reason.IMPLAUSIBLE_SYNTAX, str(exc))
    if any(p.kind == "done" for p in parsed[:-1]):
        return RejectReason(Reason.IMPLAUSIBLE_SYNTAX, "done before the last command")
    for p in parsed:
        if p.kind == "apply" and p.method not in methods:
            return RejectReason(Reason.UNKNOWN_METHOD, p.method)
    for p in parsed:
        if p.method in ("simp", "auto") and len(p.section("add")) > rules.max_add_names:
            return RejectReason(Reason.TIMEOUT_PRONE, f"{len(p.section('add'))} simp facts")
        if p.repeat > rules.max_repeat_nesting:
            return RejectReason(Reason.TIMEOUT_PRONE, "nested repetition")
    for c in cand.commands:
        if _SCHEMATIC_RE.search(_outside_quotes(c)):
            return RejectReason(Reason.UNRESOLVED_TACTIC_VAR, c)
    refs = _refs(cand)
    allowed = inventory.all
    for r in refs:
        if r not in allowed and r != target:
            return RejectReason(Reason.UNGROUNDED_FACT, r)
    if target and (target in refs or any(re.search(rf"(?<![\w.']){re.escape(target)}(?![\w'])", c)
                                         for c in cand.commands)):
        return RejectReason(Reason.SELF_REFERENCE, target)
    return None


def static_filter(cands: Sequence[Candidate], inventory: NameInventory, target: str | None,
                  seen_keys: AbstractSet[str], methods: AbstractSet[str],
                  rules: TimeoutRules = TimeoutRules()
                  ) -> tuple[list[Candidate], list[tuple[Candidate, RejectReason]]]:
    """First-matching-rule filter; ``seen_keys`` is read, never mutated."""
    accepted: list[Candidate] = []
    rejected: list[tuple[Candidate, RejectReason]] = []
    batch: set[str] = set()
    for cand in cands:
        why = reject_reason(cand, inventory, target, seen_keys | batch, methods, rules)
        if cand.commands:
            batch.add(cand.dedupe_key)
        if why is None:
            accepted.append(cand)
        else:
            rejected.append((cand, why))
    return accepted, rejected


# fallbacks

_SCHEMA = {
    "simp": (Role.SIMP, "apply (simp add: {})"),
    "rule": (Role.RULE, "apply (rule {})"),
    "struct": (Role.DEFINITION, "apply (unfold {})"),
    "wp": (Role.WP, "apply (wp {})"),
}


def fallback_candidates(inventory: NameInventory, family_plan: MethodPlan, n: int) -> list[Candidate]:
    """Name-free ``apply simp`` first, then schema instances cycling over bucket heads in plan order."""
    if n <= 0:
        return []
    order = [f for f in family_plan.targets] or list(_SCHEMA)
    buckets = {f: inventory.bucket(_SCHEMA[f][0]) for f in order}
    cmds = ["apply simp"]
    depth = max((len(b) for b in buckets.values()), default=0)
    for i in range(depth):
        for f in order:
            if i < len(buckets[f]):
                cmds.append(_SCHEMA[f][1].format(buckets[f][i]))
    out, seen = [], set()
    for c in cmds:
        if c not in seen:
            seen.add(c)
            out.append(Candidate.of([c], Provenance.FALLBACK))
    return out[:n]


def is_weak(accepted: Sequence[Candidate], C: int) -> bool:
    llm = [c for c in accepted if c.provenance is Provenance.LLM]
    return len(llm) < math.ceil(C / 3) or len({c.first_method for c in llm}) < 2


@dataclass
class CandidateBatch:
    accepted: list[Candidate] = field(default_factory=list)
    rejected: list[tuple[str, RejectReason]] = field(default_factory=list)
    used_fallbacks: bool = False


def classify_batch(raws: Sequence[str], inventory: NameInventory, target: str | None,
                   seen_keys: AbstractSet[str], methods: AbstractSet[str],
                   rules: TimeoutRules = TimeoutRules()
                   ) -> list[tuple[str, Candidate | None, RejectReason | None]]:
    """Per raw string: its normalized candidate (if any) and first-matching reject reason (if any).

    Unrepairable strings count as implausible syntax.
    """
    out: list[tuple[str, Candidate | None, RejectReason | None]] = []
    batch: set[str] = set()
    for raw in raws:
        try:
            cand = normalize(raw, inventory, target)
        except Unrepairable as exc:
            out.append((raw, None, RejectReason(Reason.IMPLAUSIBLE_SYNTAX, str(exc))))
            continue
        why = reject_reason(cand, inventory, target, seen_keys | batch, methods, rules)
        if cand.commands:
            batch.add(cand.dedupe_key)
        out.append((raw, cand, why))
    return out


def prepare_candidates(raws: Sequence[str], inventory: NameInventory, target: str | None,
                       seen_keys: AbstractSet[str], methods: AbstractSet[str], C: int,
                       plan: MethodPlan | None = None, fallbacks: bool = True,
                       rules: TimeoutRules = TimeoutRules()) -> CandidateBatch:
    """Normalize, filter, and top up weak output with fallbacks to at most C candidates."""
    batch = CandidateBatch()
    for raw, cand, why in classify_batch(raws, inventory, target, seen_keys, methods, rules):
        if why is None:
            batch.accepted.append(cand)
        else:
            batch.rejected.append((cand.dedupe_key if cand else raw, why))
    batch.accepted = batch.accepted[:C]
    if fallbacks and plan is not None and is_weak(batch.accepted, C) and len(batch.accepted) < C:
        keys = set(seen_keys) | {c.dedupe_key for c in batch.accepted}
        extra = fallback_candidates(inventory, plan, len(plan.slots) + 4 * len(inventory.all) + 1)
        ok, _ = static_filter(extra, inventory, target, keys, methods, rules)
        batch.accepted.extend(ok[:C - len(batch.accepted)])
        batch.used_fallbacks = bool(ok)
    return batch
