"""Structural database of replayed proof states and their remaining proof suffixes."""
from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np

from . import terms
from .prover import Prover
from .terms import TermSyntaxError

log = logging.getLogger(__name__)

DEFAULT_DIMENSION = 4096
TOKEN_WEIGHT = 1.0
CONSTANT_WEIGHT = 2.0
SHAPE_WEIGHT = 1.5


class ReplayFailure(RuntimeError):
    def __init__(self, theorem_id: str, step: int, message: str):
        super().__init__(f"{theorem_id}: step {step}: {message}")
        self.theorem_id = theorem_id
        self.step = step
        self.message = message


class EmptyGoal(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GoalFeatures:
    tokens: tuple[tuple[str, int], ...] = ()
    constants: frozenset[str] = frozenset()
    shape_tokens: tuple[tuple[tuple[str, str], int], ...] = ()
    depth: int = 0
    head: str = ""

    @property
    def token_counts(self) -> Counter:
        return Counter(dict(self.tokens))

    @property
    def shape_counts(self) -> Counter:
        return Counter(dict(self.shape_tokens))

    @property
    def empty(self) -> bool:
        return not self.tokens and not self.constants and not self.shape_tokens


def _multiset(items: Iterable) -> tuple:
    return tuple(sorted(Counter(items).items()))


@lru_cache(maxsize=8192)
def parse_goal(goal_text: str) -> GoalFeatures:
    """Parse a goal into lexical, constant and shape features.

    Total: text the toy grammar rejects keeps its lexical tokens and loses
    the shape features.
    """
    toks = terms.lexical_tokens(goal_text)
    if not toks:
        return GoalFeatures()
    try:
        t = terms.parse_term(goal_text)
    except TermSyntaxError:
        consts = frozenset(tok for tok in toks if not terms.is_var_name(tok))
        return GoalFeatures(_multiset(toks), consts)
    return GoalFeatures(
        tokens=_multiset(toks),
        constants=frozenset(terms.constants(t)),
        shape_tokens=_multiset(terms.shape_pairs(t)),
        depth=terms.depth(t),
        head=t.head,
    )


@lru_cache(maxsize=65536)
def _bucket(key: str, dimension: int) -> int:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dimension


def embed_goal(features: GoalFeatures, dimension: int = DEFAULT_DIMENSION) -> np.ndarray:
    if features.empty:
        raise EmptyGoal("cannot embed an empty goal")
    v = np.zeros(dimension)
    for tok, n in features.tokens:
        v[_bucket("t:" + tok, dimension)] += TOKEN_WEIGHT * n
    for c in features.constants:
        v[_bucket("c:" + c, dimension)] += CONSTANT_WEIGHT
    for (p, c), n in features.shape_tokens:
        v[_bucket(f"s:{p}>{c}", dimension)] += SHAPE_WEIGHT * n
    return v / np.linalg.norm(v)


def cosine(e1: np.ndarray, e2: np.ndarray) -> float:
    if e1.shape != e2.shape:
        raise DimensionMismatch(f"{e1.shape} vs {e2.shape}")
    n1, n2 = np.linalg.norm(e1), np.linalg.norm(e2)
    if n1 == 0 or n2 == 0:
        return 0.0
    return float(np.dot(e1, e2) / (n1 * n2))


def distance(e1: np.ndarray, e2: np.ndarray) -> float:
    """Half cosine distance, in [0, 1]."""
    return float(np.clip((1.0 - cosine(e1, e2)) / 2.0, 0.0, 1.0))


@dataclass(eq=False)
class TraceRecord:
    theorem_id: str
    step_index: int
    goal_text: str
    assumption_texts: tuple[str, ...]
    suffix: tuple[str, ...]
    constants: frozenset[str]
    embedding: np.ndarray = field(repr=False)

    @property
    def features(self) -> GoalFeatures:
        return parse_goal(self.goal_text)

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "step_index": self.step_index,
            "goal_text": self.goal_text,
            "assumptions": list(self.assumption_texts),
            "suffix": list(self.suffix),
            "constants": sorted(self.constants),
            "embedding": [float(x) for x in self.embedding],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TraceRecord":
        return cls(d["theorem_id"], int(d["step_index"]), d["goal_text"], tuple(d["assumptions"]),
                   tuple(d["suffix"]), frozenset(d["constants"]), np.asarray(d["embedding"], dtype=float))


def make_record(theorem_id: str, step: int, goal_text: str, assumptions, suffix,
                dimension: int = DEFAULT_DIMENSION) -> TraceRecord:
    feats = parse_goal(goal_text)
    return TraceRecord(theorem_id, step, goal_text, tuple(assumptions), tuple(suffix),
                       feats.constants, embed_goal(feats, dimension))


def replay_and_record(theorem_id: str, prover: Prover, script=None,
                      dimension: int = DEFAULT_DIMENSION) -> list[TraceRecord]:
    """Replay a reference script, recording every open state with its remaining suffix."""
    if script is None:
        script = prover.theory.theorems[theorem_id].script  # toy prover only
    script = list(script)
    state = prover.probe_initial_state(theorem_id)
    records = []
    for i, cmd in enumerate(script):
        if state.closed:
            if all(c.strip() == "done" for c in script[i:]):
                return records
            raise ReplayFailure(theorem_id, i, "commands after the proof was closed")
        if not state.goal_text:
            raise ReplayFailure(theorem_id, i, "empty goal")
        records.append(make_record(theorem_id, i, state.goal_text, state.assumption_texts,
                                   script[i:], dimension))
        result = prover.apply_command(state, cmd)
        if result.outcome == "error":
            raise ReplayFailure(theorem_id, i, f"{result.error_class.value}: {result.message}")
        state = result.state
    if not state.closed:
        raise ReplayFailure(theorem_id, len(script), "script ends with open goals")
    return records


@dataclass(eq=False)
class TraceIndex:
    records: list[TraceRecord] = field(default_factory=list)
    dimension: int = DEFAULT_DIMENSION
    skipped: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self._reindex()

    def _reindex(self) -> None:
        self.by_theorem: dict[str, tuple[int, int]] = {}
        seen = set()
        for i, r in enumerate(self.records):
            key = (r.theorem_id, r.step_index)
            if key in seen:
                raise ValueError(f"duplicate record {key}")
            seen.add(key)
            if r.embedding.shape != (self.dimension,):
                raise DimensionMismatch(f"record {key} has dimension {r.embedding.shape}")
            lo, _ = self.by_theorem.get(r.theorem_id, (i, i))
            self.by_theorem[r.theorem_id] = (lo, i + 1)
        self._matrix = (np.stack([r.embedding for r in self.records])
                        if self.records else np.zeros((0, self.dimension)))

    def __len__(self) -> int:
        return len(self.records)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def theorem_records(self, theorem_id: str) -> list[TraceRecord]:
        lo, hi = self.by_theorem.get(theorem_id, (0, 0))
        return self.records[lo:hi]

    def initial_record(self, theorem_id: str) -> TraceRecord | None:
        for r in self.theorem_records(theorem_id):
            if r.step_index == 0:
                return r
        return None

    def to_dict(self) -> dict:
        return {"dimension": self.dimension, "records": [r.to_dict() for r in self.records]}

    @classmethod
    def from_dict(cls, data: dict) -> "TraceIndex":
        return cls([TraceRecord.from_dict(r) for r in data["records"]], int(data["dimension"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "TraceIndex":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_index(prover: Prover, excluded: Iterable[str] = (), theorems: Iterable[str] | None = None,
                dimension: int = DEFAULT_DIMENSION) -> TraceIndex:
    """Replay every non-excluded theorem; broken scripts are logged and skipped."""
    excluded = set(excluded)
    names = list(theorems) if theorems is not None else list(prover.theory.theorems)
    records: list[TraceRecord] = []
    skipped: dict[str, str] = {}
    for name in names:
        if name in excluded:
            continue
        try:
            records.extend(replay_and_record(name, prover, dimension=dimension))
        except (ReplayFailure, EmptyGoal) as exc:
            log.warning("skipping %s: %s", name, exc)
            skipped[name] = str(exc)
    index = TraceIndex(records, dimension)
    index.skipped = skipped
    return index
