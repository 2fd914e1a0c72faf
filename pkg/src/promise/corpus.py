"""Seeded corpus variants and scripted candidate tables for the toy theory."""
from __future__ import annotations

import copy
import json
import random
import re
from importlib import resources
from typing import Sequence

from .prover import ToyProver, ToyTheory
from .trace_index import replay_and_record

_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


def default_theory_dict() -> dict:
    return json.loads(resources.files("promise").joinpath("data/toy_theory.json").read_text(encoding="utf-8"))


def default_theory() -> ToyTheory:
    return ToyTheory.from_dict(default_theory_dict())


def default_benchmark_path() -> str:
    return str(resources.files("promise").joinpath("data/benchmark.json"))


def _rename_script(script: Sequence[str], mapping: dict[str, str]) -> list[str]:
    return [_WORD_RE.sub(lambda m: mapping.get(m.group(0), m.group(0)), cmd) for cmd in script]


def renamed_theory(data: dict, rng: random.Random) -> tuple[dict, dict[str, str]]:
    """Give every named fact and theorem a fresh random name (``_def`` suffixes survive)."""
    data = copy.deepcopy(data)
    used: set[str] = set()

    def fresh(old: str, prefix: str) -> str:
        while True:
            new = f"{prefix}{rng.getrandbits(32):08x}"
            if new not in used:
                used.add(new)
                return new + ("_def" if old.endswith("_def") else "")

    mapping: dict[str, str] = {}
    for section, prefix in (("rules", "r"), ("facts", "f"), ("definitions", "d"), ("theorems", "thm")):
        for entry in data.get(section, []):
            mapping[entry["name"]] = fresh(entry["name"], prefix)
    for section in ("rules", "facts", "definitions", "theorems"):
        for entry in data.get(section, []):
            entry["name"] = mapping[entry["name"]]
    for thm in data.get("theorems", []):
        thm["script"] = _rename_script(thm.get("script", []), mapping)
    return data, mapping


def theorem_subset(data: dict, rng: random.Random, keep: int) -> dict:
    """Random subset of theorems; axioms and definitions are always kept."""
    data = copy.deepcopy(data)
    thms = data["theorems"]
    chosen = sorted(rng.sample(range(len(thms)), min(keep, len(thms))))
    data["theorems"] = [thms[i] for i in chosen]
    # drop theorems whose scripts cite a removed theorem
    names = {t["name"] for t in data["theorems"]}
    removed = {t["name"] for t in thms} - names
    data["theorems"] = [t for t in data["theorems"]
                        if not removed & set(_WORD_RE.findall(" ".join(t.get("script", []))))]
    return data


def _distractor_pool(prover: ToyProver, exclude: str) -> list[str]:
    th = prover.theory
    pool = ["apply simp", "apply auto", "apply assumption"]
    for name in th.fact_names():
        if name == exclude:
            continue
        if name.endswith("_def"):
            pool.append(f"apply (unfold {name})")
        pool.append(f"apply (rule {name})")
        pool.append(f"apply (simp add: {name})")
    for sort in th.sorts:
        pool.extend(f"apply (cases {v})" for v in sort.variables)
    return pool


def scripted_table(prover: ToyProver, theorem_id: str, rng: random.Random, distractors: int = 3,
                   drop_step: int | None = None) -> list[tuple[str, list[str]]]:
    """Exact-goal patterns along the reference proof: the reference step plus shuffled distractors.

    With ``drop_step`` the reference command at that index is withheld, which
    usually makes the theorem unprovable from the table.
    """
    records = replay_and_record(theorem_id, prover)
    pool = _distractor_pool(prover, theorem_id)
    refs: dict[str, list[str]] = {}
    for rec in records:
        cmds = refs.setdefault(rec.goal_text, [])
        if rec.step_index != drop_step and rec.suffix[0] not in cmds:
            cmds.append(rec.suffix[0])
    table: dict[str, list[str]] = {}
    for goal, cmds in refs.items():
        extra = [c for c in rng.sample(pool, min(len(pool), distractors * 3)) if c not in cmds]
        row = cmds + extra[:max(0, 1 + distractors - len(cmds))]
        rng.shuffle(row)
        table[goal] = row
    return [("^" + re.escape(goal) + "$", ["\n".join(f"{i}. {c}" for i, c in enumerate(cmds, 1))])
            for goal, cmds in table.items()]
