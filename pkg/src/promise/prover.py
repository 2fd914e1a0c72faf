"""Prover backend interface and the deterministic toy tactic calculus.

The toy calculus supports ``apply simp``, ``apply auto``, ``apply (simp add: …)``,
``apply (rule N)``, ``apply (wp N …)``, ``apply (cases V)``,
``apply (unfold N_def …)``, ``apply assumption``, ``apply (M)+`` and ``done``.
"""
from __future__ import annotations

import abc
import json
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from . import terms
from .commands import Command, CommandSyntaxError, parse_command
from .terms import FALSE, TRUE, MatchFailure, Term, TermSyntaxError

SIMP_STEP_LIMIT = 1000
REPEAT_LIMIT = 100
TOY_DEFAULT_BUDGET = 1.0
BRIDGE_DEFAULT_BUDGET = 120.0

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")
_NAMED_PREMISE_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_']*)\s*:\s*(.+)$")
LOGICAL_CONSTANTS = frozenset({"=", "∧", "∨", "⟶", "⟹", "¬", "∀", "True", "False"})


class UnknownTheorem(KeyError):
    pass


class TheoryError(ValueError):
    pass


class ErrorClass(str, Enum):
    PARSE = "parse"
    UNKNOWN_FACT = "unknown_fact"
    TACTIC_FAILED = "tactic_failed"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class ProofState:
    goals: tuple[Term, ...]
    assumptions: tuple[tuple[str, Term], ...] = ()
    fingerprint: str = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fingerprint", state_fingerprint(self.goals, self.assumptions))

    @property
    def subgoal_count(self) -> int:
        return len(self.goals)

    @property
    def closed(self) -> bool:
        return not self.goals

    @property
    def goal_text(self) -> str:
        return terms.render(self.goals[0]) if self.goals else ""

    @property
    def assumption_texts(self) -> list[str]:
        return [f"{name}: {terms.render(t)}" for name, t in self.assumptions]

    def to_dict(self) -> dict:
        return {
            "goals": [terms.render(g) for g in self.goals],
            "assumptions": self.assumption_texts,
            "subgoal_count": self.subgoal_count,
            "fingerprint": self.fingerprint,
        }


def state_fingerprint(goals: Sequence[Term], assumptions: Iterable[tuple[str, Term]]) -> str:
    g = ";".join(terms.canonical(t) for t in goals)
    a = ";".join(sorted(f"{n}:{terms.canonical(t)}" for n, t in assumptions))
    return f"G[{g}]A[{a}]"


CLOSED_STATE = ProofState(())


@dataclass(frozen=True)
class StepResult:
    outcome: str  # "progressed" | "closed" | "error"
    state: ProofState | None = None
    message: str = ""
    error_class: ErrorClass | None = None
    elapsed: float = field(default=0.0, compare=False)

    @classmethod
    def progressed(cls, state: ProofState) -> "StepResult":
        return cls("progressed", state)

    @classmethod
    def closed(cls) -> "StepResult":
        return cls("closed", CLOSED_STATE)

    @classmethod
    def error(cls, error_class: ErrorClass, message: str) -> "StepResult":
        return cls("error", None, message, ErrorClass(error_class))

    @property
    def ok(self) -> bool:
        return self.outcome != "error"

    def to_dict(self) -> dict:
        d: dict = {"outcome": self.outcome}
        if self.outcome == "progressed":
            d["state"] = self.state.to_dict()
        if self.outcome == "error":
            d["error_class"] = self.error_class.value
            d["message"] = self.message
        return d


@dataclass
class TheoryCheck:
    ok: bool
    log: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# theory


@dataclass(frozen=True)
class Equation:
    name: str
    lhs: Term
    rhs: Term
    simp: bool = False

    @property
    def statement(self) -> Term:
        return Term("=", (self.lhs, self.rhs))


@dataclass(frozen=True)
class RuleFact:
    name: str
    premises: tuple[Term, ...]
    conclusion: Term


@dataclass(frozen=True)
class TheoremEntry:
    name: str
    statement: Term
    premises: tuple[tuple[str, Term], ...]
    script: tuple[str, ...]


@dataclass(frozen=True)
class Sort:
    name: str
    constructors: tuple[Term, ...]
    variables: tuple[str, ...]


def _parse(text: str, where: str) -> Term:
    try:
        return terms.parse_term(text)
    except TermSyntaxError as exc:
        raise TheoryError(f"{where}: {exc}") from exc


def _premise_chain(premises: Sequence[Term], conclusion: Term) -> Term:
    t = conclusion
    for p in reversed(premises):
        t = Term("⟹", (p, t))
    return t


@dataclass
class ToyTheory:
    rules: dict[str, Equation] = field(default_factory=dict)
    facts: dict[str, RuleFact] = field(default_factory=dict)
    definitions: dict[str, Equation] = field(default_factory=dict)
    theorems: dict[str, TheoremEntry] = field(default_factory=dict)
    sorts: list[Sort] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: dict) -> "ToyTheory":
        th = cls()
        seen: set[str] = set()

        def claim(name: str) -> str:
            if not isinstance(name, str) or not _NAME_RE.match(name):
                raise TheoryError(f"bad fact name {name!r}")
            if name in seen:
                raise TheoryError(f"duplicate name {name!r}")
            seen.add(name)
            return name

        try:
            for r in data.get("rules", []):
                name = claim(r["name"])
                th.rules[name] = Equation(name, _parse(r["lhs"], name), _parse(r["rhs"], name),
                                          bool(r.get("simp", False)))
            for f in data.get("facts", []):
                name = claim(f["name"])
                prems = tuple(_parse(p, name) for p in f.get("premises", []))
                th.facts[name] = RuleFact(name, prems, _parse(f["conclusion"], name))
            for d in data.get("definitions", []):
                name = claim(d["name"])
                if not name.endswith("_def"):
                    raise TheoryError(f"definition name must end in _def: {name!r}")
                th.definitions[name] = Equation(name, _parse(d["lhs"], name), _parse(d["rhs"], name))
            for t in data.get("theorems", []):
                name = claim(t["name"])
                prems = []
                for i, p in enumerate(t.get("premises", [])):
                    m = _NAMED_PREMISE_RE.match(p)
                    pname, ptext = (m.group(1), m.group(2)) if m else (f"h{i + 1}", p)
                    prems.append((pname, _parse(ptext, name)))
                th.theorems[name] = TheoremEntry(name, _parse(t["statement"], name), tuple(prems),
                                                 tuple(t.get("script", [])))
            for s in data.get("sorts", []):
                th.sorts.append(Sort(s["name"], tuple(_parse(c, s["name"]) for c in s["constructors"]),
                                     tuple(s.get("variables", []))))
        except (KeyError, TypeError) as exc:
            raise TheoryError(f"malformed theory: {exc}") from exc
        th._check_variables()
        return th

    @classmethod
    def load(cls, path: str | Path) -> "ToyTheory":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise TheoryError(f"{path}: {exc}") from exc
        if not isinstance(data, dict):
            raise TheoryError(f"{path}: top level must be an object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        r = terms.render
        return {
            "rules": [{"name": e.name, "lhs": r(e.lhs), "rhs": r(e.rhs), "simp": e.simp}
                      for e in self.rules.values()],
            "facts": [{"name": f.name, "premises": [r(p) for p in f.premises], "conclusion": r(f.conclusion)}
                      for f in self.facts.values()],
            "definitions": [{"name": e.name, "lhs": r(e.lhs), "rhs": r(e.rhs)}
                            for e in self.definitions.values()],
            "theorems": [{"name": t.name, "statement": r(t.statement),
                          "premises": [f"{n}: {r(p)}" for n, p in t.premises], "script": list(t.script)}
                         for t in self.theorems.values()],
            "sorts": [{"name": s.name, "constructors": [r(c) for c in s.constructors],
                       "variables": list(s.variables)} for s in self.sorts],
        }

    def _check_variables(self) -> None:
        for e in list(self.rules.values()) + list(self.definitions.values()):
            if not terms.free_vars(e.rhs) <= terms.free_vars(e.lhs):
                raise TheoryError(f"{e.name}: right-hand side introduces variables")
        for f in self.facts.values():
            concl = terms.free_vars(f.conclusion)
            for p in f.premises:
                if not terms.free_vars(p) <= concl:
                    raise TheoryError(f"{f.name}: premise variables must occur in the conclusion")
        for t in self.theorems.values():
            concl = terms.free_vars(t.statement)
            for _, p in t.premises:
                if not terms.free_vars(p) <= concl:
                    raise TheoryError(f"{t.name}: premise variables must occur in the statement")

    # -- lookups ----------------------------------------------------------

    def fact_names(self) -> list[str]:
        return sorted([*self.rules, *self.facts, *self.definitions, *self.theorems])

    def has_fact(self, name: str) -> bool:
        return name in self.rules or name in self.facts or name in self.definitions or name in self.theorems

    def fact_parts(self, name: str) -> tuple[list[Term], Term]:
        """(premises, conclusion) of any named fact."""
        if name in self.rules:
            return [], self.rules[name].statement
        if name in self.definitions:
            return [], self.definitions[name].statement
        if name in self.facts:
            f = self.facts[name]
            return list(f.premises), f.conclusion
        if name in self.theorems:
            t = self.theorems[name]
            return [p for _, p in t.premises], t.statement
        raise KeyError(name)

    def fact_statement(self, name: str) -> str:
        prems, concl = self.fact_parts(name)
        return terms.render(_premise_chain(prems, concl))

    def sort_of(self, var: str) -> Sort | None:
        base = var.rstrip("'")
        for s in self.sorts:
            if var in s.variables or base in s.variables:
                return s
        return None

    def constructor_heads(self) -> dict[str, str]:
        return {c.head: s.name for s in self.sorts for c in s.constructors}

    def declared_constants(self) -> set[str]:
        out: set[str] = set(terms.BUILTIN_CONSTANTS)
        for name in self.fact_names():
            prems, concl = self.fact_parts(name)
            for t in [*prems, concl]:
                out |= terms.constants(t)
        for s in self.sorts:
            for c in s.constructors:
                out |= terms.constants(c)
        return out


# ---------------------------------------------------------------------------
# interface


class Prover(abc.ABC):
    """Backend contract used by the search engine.

    Implementations that keep per-session state must declare
    ``concurrent_safe = False``; the engine then serialises calls.
    """

    concurrent_safe = True
    default_budget = BRIDGE_DEFAULT_BUDGET

    @property
    @abc.abstractmethod
    def methods(self) -> frozenset[str]:
        ...

    @abc.abstractmethod
    def probe_initial_state(self, theorem_id: str) -> ProofState:
        ...

    @abc.abstractmethod
    def apply_command(self, state: ProofState, command: str, budget: float | None = None) -> StepResult:
        ...

    @abc.abstractmethod
    def whole_theory_check(self, theorem_id: str, script: Sequence[str]) -> TheoryCheck:
        ...

    @abc.abstractmethod
    def search_facts(self, pattern: str, state: ProofState | None = None) -> list[str]:
        ...

    @abc.abstractmethod
    def check_fact_exists(self, name: str) -> bool:
        ...

    @abc.abstractmethod
    def fact_statement(self, name: str) -> str:
        ...

    @abc.abstractmethod
    def fact_names(self) -> list[str]:
        ...

    @abc.abstractmethod
    def context_definitions(self, state: ProofState | None = None) -> list[str]:
        ...

    @abc.abstractmethod
    def theorem_statement(self, theorem_id: str) -> str:
        ...

    def run_commands(self, state: ProofState, commands: Sequence[str],
                     budget: float | None = None) -> StepResult:
        """Execute a short command sequence; trailing ``done`` after closure is a no-op."""
        result = StepResult.progressed(state)
        for i, cmd in enumerate(commands):
            if result.outcome == "closed":
                if cmd.strip() == "done":
                    continue
                return StepResult.error(ErrorClass.TACTIC_FAILED, f"no subgoals left for {cmd!r}")
            result = self.apply_command(result.state, cmd, budget)
            if result.outcome == "error":
                return result
        return result


# ---------------------------------------------------------------------------
# toy prover


class _TacticError(Exception):
    def __init__(self, error_class: ErrorClass, message: str):
        super().__init__(message)
        self.error_class = error_class


@dataclass(frozen=True)
class _Rewrite:
    lhs: Term
    rhs: Term
    conditions: tuple[Term, ...] = ()
    schematic: bool = True


def _as_rewrite(prems: Sequence[Term], concl: Term, schematic: bool = True) -> _Rewrite | None:
    if concl.head == "=" and len(concl.args) == 2:
        lhs, rhs = concl.args
        if terms.is_var_name(lhs.head) and not lhs.args and schematic:
            return _Rewrite(concl, TRUE, tuple(prems), schematic)
        if lhs == rhs:
            return _Rewrite(concl, TRUE, tuple(prems), schematic)
        return _Rewrite(lhs, rhs, tuple(prems), schematic)
    if concl == TRUE:
        return None
    return _Rewrite(concl, TRUE, tuple(prems), schematic)


class ToyProver(Prover):
    """Pure, deterministic implementation of the prover contract over a ToyTheory."""

    default_budget = TOY_DEFAULT_BUDGET
    _METHODS = frozenset({"simp", "auto", "rule", "wp", "cases", "unfold", "assumption"})

    def __init__(self, theory: ToyTheory):
        self.theory = theory
        self._constructors = theory.constructor_heads()
        self._simpset = [_as_rewrite([], e.statement) for e in theory.rules.values() if e.simp]
        self._fact_consts = {n: self._statement_constants(n) for n in theory.fact_names()}

    @property
    def methods(self) -> frozenset[str]:
        return self._METHODS

    def _statement_constants(self, name: str) -> set[str]:
        prems, concl = self.theory.fact_parts(name)
        out: set[str] = set()
        for t in [*prems, concl]:
            out |= terms.constants(t)
        return out

    # -- contract ---------------------------------------------------------

    def probe_initial_state(self, theorem_id: str) -> ProofState:
        thm = self.theory.theorems.get(theorem_id)
        if thm is None:
            raise UnknownTheorem(theorem_id)
        return ProofState((thm.statement,), thm.premises)

    def theorem_statement(self, theorem_id: str) -> str:
        thm = self.theory.theorems.get(theorem_id)
        if thm is None:
            raise UnknownTheorem(theorem_id)
        return terms.render(thm.statement)

    def check_fact_exists(self, name: str) -> bool:
        return self.theory.has_fact(name)

    def fact_statement(self, name: str) -> str:
        return self.theory.fact_statement(name)

    def fact_names(self) -> list[str]:
        return self.theory.fact_names()

    def context_definitions(self, state: ProofState | None = None) -> list[str]:
        return sorted(self.theory.definitions)

    def search_facts(self, pattern: str, state: ProofState | None = None) -> list[str]:
        want = {tok for tok in terms.lexical_tokens(pattern) if not terms.is_var_name(tok)}
        hits = [(len(want & consts), name) for name, consts in self._fact_consts.items() if want <= consts]
        hits.sort(key=lambda x: (-x[0], x[1]))
        return [name for _, name in hits]

    def apply_command(self, state: ProofState, command: str, budget: float | None = None) -> StepResult:
        if state.closed:
            raise ValueError("apply_command on a closed state")
        start = time.perf_counter()
        budget = self.default_budget if budget is None else budget
        deadline = start + budget
        try:
            cmd = parse_command(command)
        except CommandSyntaxError as exc:
            return StepResult.error(ErrorClass.PARSE, str(exc))
        try:
            if cmd.kind == "done":
                raise _TacticError(ErrorClass.TACTIC_FAILED, f"{state.subgoal_count} subgoal(s) remain")
            if cmd.method not in self._METHODS:
                raise _TacticError(ErrorClass.PARSE, f"undefined method {cmd.method!r}")
            goals = self._run(cmd, state, deadline)
        except _TacticError as exc:
            return StepResult.error(exc.error_class, str(exc))
        elapsed = time.perf_counter() - start
        if not goals:
            return StepResult("closed", CLOSED_STATE, elapsed=elapsed)
        new = ProofState(tuple(goals), state.assumptions)
        if new.fingerprint == state.fingerprint:
            return StepResult.error(ErrorClass.TACTIC_FAILED, f"{cmd.method} made no progress")
        return StepResult("progressed", new, elapsed=elapsed)

    def whole_theory_check(self, theorem_id: str, script: Sequence[str]) -> TheoryCheck:
        log: list[str] = []
        try:
            state = self.probe_initial_state(theorem_id)
        except UnknownTheorem:
            return TheoryCheck(False, [f"unknown theorem {theorem_id!r}"])
        for i, cmd in enumerate(script):
            try:
                refs = parse_command(cmd).fact_refs()
            except CommandSyntaxError:
                refs = []
            if theorem_id in refs:
                return TheoryCheck(False, log + [f"step {i}: circular use of {theorem_id!r}"])
        result = self.run_commands(state, list(script), budget=self.default_budget)
        if result.outcome == "error":
            log.append(f"{result.error_class.value}: {result.message}")
            return TheoryCheck(False, log)
        if result.outcome != "closed":
            log.append(f"proof incomplete: {result.state.subgoal_count} subgoal(s) remain")
            return TheoryCheck(False, log)
        log.append("ok")
        return TheoryCheck(True, log)

    # -- tactics ----------------------------------------------------------

    def _run(self, cmd: Command, state: ProofState, deadline: float) -> list[Term]:
        if not cmd.repeat:
            return self._once(cmd, state, deadline)
        # (M)+ : at least one success, then repeat while it still applies
        goals = self._once(cmd, state, deadline)
        for _ in range(REPEAT_LIMIT):
            if not goals:
                break
            current = ProofState(tuple(goals), state.assumptions)
            try:
                nxt = self._once(cmd, current, deadline)
            except _TacticError as exc:
                if exc.error_class == ErrorClass.TIMEOUT:
                    raise
                break
            if ProofState(tuple(nxt), state.assumptions).fingerprint == current.fingerprint:
                break
            goals = nxt
        return goals

    def _once(self, cmd: Command, state: ProofState, deadline: float) -> list[Term]:
        goals = list(state.goals)
        m = cmd.method
        if m in ("simp", "auto"):
            extra = self._rewrites_for(cmd.section("add"))
            rules = self._simpset + extra + self._assumption_rewrites(state)
            targets = range(len(goals)) if m == "auto" else range(1)
            changed = False
            out: list[Term] = []
            for i, g in enumerate(goals):
                if i in targets:
                    ng = self._normalize(g, rules, deadline, builtins=True, assumptions=state.assumptions)
                    if ng == FALSE:
                        raise _TacticError(ErrorClass.TACTIC_FAILED, f"{m} reduced a goal to False")
                    changed |= ng != g
                    if ng != TRUE:
                        out.append(ng)
                else:
                    out.append(g)
            if not changed:
                raise _TacticError(ErrorClass.TACTIC_FAILED, f"{m} made no progress")
            return out
        if m in ("rule", "wp"):
            if not cmd.args:
                raise _TacticError(ErrorClass.PARSE, f"{m} needs a fact name")
            for name in cmd.args:
                self._require_fact(name)
            for name in cmd.args:
                prems, concl = self.theory.fact_parts(name)
                try:
                    s = terms.match(concl, goals[0])
                    new = [terms.substitute(p, s) for p in prems]
                except MatchFailure:
                    continue
                return new + goals[1:]
            raise _TacticError(ErrorClass.TACTIC_FAILED, f"{m}: no fact unifies with the goal")
        if m == "cases":
            if len(cmd.args) != 1:
                raise _TacticError(ErrorClass.PARSE, "cases needs exactly one variable")
            var = cmd.args[0]
            goal = goals[0]
            fv = terms.free_vars(goal)
            if var not in fv:
                raise _TacticError(ErrorClass.TACTIC_FAILED, f"{var} does not occur in the goal")
            sort = self.theory.sort_of(var)
            if sort is None:
                raise _TacticError(ErrorClass.TACTIC_FAILED, f"no datatype known for {var}")
            split = []
            for con in sort.constructors:
                taken = fv | {var}
                ren = {}
                for v in sorted(terms.free_vars(con)):
                    ren[v] = Term(terms.fresh_name(var, taken))
                    taken.add(ren[v].head)
                split.append(terms.substitute(goal, {var: terms.substitute(con, ren)}))
            return split + goals[1:]
        if m == "unfold":
            if not cmd.args:
                raise _TacticError(ErrorClass.PARSE, "unfold needs a fact name")
            rules = []
            for name in cmd.args:
                self._require_fact(name)
                prems, concl = self.theory.fact_parts(name)
                if prems or concl.head != "=":
                    raise _TacticError(ErrorClass.TACTIC_FAILED, f"{name} is not an unconditional equation")
                rules.append(_Rewrite(concl.args[0], concl.args[1]))
            ng = self._normalize(goals[0], rules, deadline, builtins=False)
            if ng == goals[0]:
                raise _TacticError(ErrorClass.TACTIC_FAILED, "unfold made no progress")
            return [ng] + goals[1:]
        if m == "assumption":
            for _, a in state.assumptions:
                if terms.alpha_equal(a, goals[0]):
                    return goals[1:]
            raise _TacticError(ErrorClass.TACTIC_FAILED, "no matching assumption")
        raise _TacticError(ErrorClass.PARSE, f"undefined method {m!r}")

    def _require_fact(self, name: str) -> None:
        if not self.theory.has_fact(name):
            raise _TacticError(ErrorClass.UNKNOWN_FACT, f"unknown fact '{name}'")

    def _rewrites_for(self, names: Iterable[str]) -> list[_Rewrite]:
        out = []
        for name in names:
            self._require_fact(name)
            rw = _as_rewrite(*self.theory.fact_parts(name))
            if rw is not None:
                out.append(rw)
        return out

    def _assumption_rewrites(self, state: ProofState) -> list[_Rewrite]:
        out = []
        for _, a in state.assumptions:
            rw = _as_rewrite([], a, schematic=False)
            if rw is not None:
                out.append(rw)
        return out

    def _normalize(self, t: Term, rules: list[_Rewrite], deadline: float, builtins: bool,
                   assumptions: Sequence[tuple[str, Term]] = ()) -> Term:
        hyps = [a for _, a in assumptions]
        for _ in range(SIMP_STEP_LIMIT):
            if time.perf_counter() >= deadline:
                raise _TacticError(ErrorClass.TIMEOUT, "probe budget exceeded")
            nxt = self._step(t, rules, builtins, hyps)
            if nxt is None:
                return t
            t = nxt
        raise _TacticError(ErrorClass.TIMEOUT, f"rewriting did not terminate within {SIMP_STEP_LIMIT} steps")

    def _step(self, t: Term, rules: list[_Rewrite], builtins: bool, hyps: list[Term]) -> Term | None:
        for path, sub in terms.positions(t):
            for rw in rules:
                new = self._try_rewrite(rw, sub, hyps)
                if new is not None:
                    return terms.replace_at(t, path, new)
            if builtins:
                new = self._builtin(sub)
                if new is not None:
                    return terms.replace_at(t, path, new)
        return None

    @staticmethod
    def _try_rewrite(rw: _Rewrite, sub: Term, hyps: list[Term]) -> Term | None:
        if not rw.schematic:
            return rw.rhs if terms.alpha_equal(rw.lhs, sub) else None
        try:
            s = terms.match(rw.lhs, sub)
            for c in rw.conditions:
                ci = terms.substitute(c, s)
                if not any(terms.alpha_equal(ci, h) for h in hyps):
                    return None
            return terms.substitute(rw.rhs, s)
        except MatchFailure:
            return None

    def _builtin(self, t: Term) -> Term | None:
        h, a = t.head, t.args
        if h == "=" and len(a) == 2:
            if terms.alpha_equal(a[0], a[1]):
                return TRUE
            c0, c1 = self._constructors.get(a[0].head), self._constructors.get(a[1].head)
            if c0 and c0 == c1 and a[0].head != a[1].head:
                return FALSE
            return None
        if h == "∧" and len(a) == 2:
            if a[0] == TRUE:
                return a[1]
            if a[1] == TRUE:
                return a[0]
            if FALSE in a:
                return FALSE
        if h == "∨" and len(a) == 2:
            if TRUE in a:
                return TRUE
            if a[0] == FALSE:
                return a[1]
            if a[1] == FALSE:
                return a[0]
        if h == "⟶" and len(a) == 2:
            if a[0] == TRUE:
                return a[1]
            if a[0] == FALSE or a[1] == TRUE:
                return TRUE
        if h == "¬" and len(a) == 1:
            if a[0] == TRUE:
                return FALSE
            if a[0] == FALSE:
                return TRUE
        return None


def load_prover(path: str | Path) -> ToyProver:
    return ToyProver(ToyTheory.load(path))
