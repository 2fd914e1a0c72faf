"""``promise index|prove|bench``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .config import Config, ConfigError
from .llm import Backend, HeuristicBackend, HttpBackend, ScriptedBackend
from .prover import TheoryError, ToyProver, ToyTheory, UnknownTheorem
from .search import BeamSearch, Proved, SearchLog
from .trace_index import TraceIndex, build_index

log = logging.getLogger("promise")

EXIT_PROVED, EXIT_FAILED, EXIT_PARSE, EXIT_IO, EXIT_UNKNOWN = 0, 1, 2, 3, 4
LEVELS = ("P1", "P2", "P3")


@dataclass(frozen=True)
class BenchmarkTask:
    theorem_id: str
    level: str
    theory_file: Path

    @classmethod
    def from_dict(cls, d: dict, base: Path) -> "BenchmarkTask":
        if d.get("level") not in LEVELS:
            raise ValueError(f"bad level {d.get('level')!r} for {d.get('theorem_id')!r}")
        path = Path(d["theory_file"])
        return cls(str(d["theorem_id"]), d["level"], path if path.is_absolute() else base / path)


def load_benchmark(path: str | Path) -> list[BenchmarkTask]:
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError("benchmark must be a JSON list")
    return [BenchmarkTask.from_dict(d, path.parent) for d in data]


def write_json_atomic(path: str | Path, data) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def make_backend(cfg: Config, kind: str | None = None) -> Backend:
    kind = kind or cfg.backend.kind
    b, cap = cfg.backend, cfg.search.query_cap
    if kind == "http":
        return HttpBackend(b.base_url, b.model, query_cap=cap, timeout=b.timeout, max_in_flight=b.max_in_flight)
    if kind == "scripted" and b.table:
        return ScriptedBackend.from_json(b.table, query_cap=cap)
    # a scripted run without a table falls back to the model-free template filler
    return HeuristicBackend(query_cap=cap)


def run_task(theorem_id: str, prover: ToyProver, index: TraceIndex, cfg: Config,
             backend_kind: str | None = None, log_path: Path | None = None) -> dict:
    """One theorem, fresh backend and stats; never raises for search-level failures."""
    backend = make_backend(cfg, backend_kind)
    search_log = SearchLog()
    try:
        outcome = BeamSearch(prover, index, backend, cfg.search, search_log=search_log).search(theorem_id)
    except UnknownTheorem:
        return {"theorem_id": theorem_id, "status": "error", "script": None,
                "fail_reason": "unknown_theorem", "stats": None}
    finally:
        if log_path is not None:
            log_path.parent.mkdir(parents=True, exist_ok=True)
            search_log.dump(log_path)
        if isinstance(backend, HttpBackend):
            backend.close()
    if isinstance(outcome, Proved):
        if not prover.whole_theory_check(theorem_id, outcome.script):  # defensive re-check
            return {"theorem_id": theorem_id, "status": "error", "script": None,
                    "fail_reason": "recheck_failed", "stats": outcome.stats.to_dict()}
        return {"theorem_id": theorem_id, "status": "proved", "script": outcome.script,
                "fail_reason": None, "stats": outcome.stats.to_dict()}
    return {"theorem_id": theorem_id, "status": "failed", "script": None,
            "fail_reason": outcome.reason.value, "stats": outcome.stats.to_dict()}


def _load_config(args) -> Config:
    cfg = Config.load(args.config)
    if args.seed is not None:
        cfg.search.seed = args.seed
    return cfg


def cmd_index(args) -> int:
    try:
        theory = ToyTheory.load(args.theory)
    except (OSError, TheoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    index = build_index(ToyProver(theory), excluded=args.exclude or ())
    out = Path(args.out or "proof_suffix.json")
    try:
        index.save(out)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{len(index)} records")
    return EXIT_PROVED


def _prover_and_index(theory_path, index_path) -> tuple[ToyProver, TraceIndex]:
    prover = ToyProver(ToyTheory.load(theory_path))
    index = TraceIndex.load(index_path) if index_path else build_index(prover)
    return prover, index


def cmd_prove(args) -> int:
    try:
        cfg = _load_config(args)
        prover, index = _prover_and_index(args.theory, args.index)
    except (ConfigError, TheoryError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.theorem not in prover.theory.theorems:
        print(f"error: unknown theorem {args.theorem!r}", file=sys.stderr)
        return EXIT_UNKNOWN
    log_path = Path(args.log) if args.log else None
    result = run_task(args.theorem, prover, index, cfg, args.backend, log_path)
    try:
        if args.out:
            write_json_atomic(args.out, result)
        else:
            print(json.dumps(result, indent=2, sort_keys=True))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_PROVED if result["status"] == "proved" else EXIT_FAILED


def summarize(results: Sequence[dict]) -> dict:
    summary = {lvl: {"attempted": 0, "proved": 0} for lvl in LEVELS}
    for r in results:
        summary[r["level"]]["attempted"] += 1
        summary[r["level"]]["proved"] += r["status"] == "proved"
    return summary


def cmd_bench(args) -> int:
    try:
        cfg = _load_config(args)
        tasks = load_benchmark(args.benchmark)
        if args.theory:
            tasks = [BenchmarkTask(t.theorem_id, t.level, Path(args.theory)) for t in tasks]
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    out = Path(args.out or "bench_out")
    indexes: dict[Path, TraceIndex | Exception] = {}
    for task in tasks:
        if task.theory_file not in indexes:
            try:
                indexes[task.theory_file] = (TraceIndex.load(args.index) if args.index
                                             else build_index(ToyProver(ToyTheory.load(task.theory_file))))
            except (OSError, TheoryError, ValueError) as exc:
                indexes[task.theory_file] = exc

    def work(task: BenchmarkTask) -> dict:
        try:
            index = indexes[task.theory_file]
            if isinstance(index, Exception):
                raise index
            prover = ToyProver(ToyTheory.load(task.theory_file))
            result = run_task(task.theorem_id, prover, index, cfg, args.backend,
                              out / "tasks" / f"{task.theorem_id}.log.jsonl")
        except Exception as exc:  # isolation: one task never aborts the batch
            log.exception("task %s crashed", task.theorem_id)
            result = {"theorem_id": task.theorem_id, "status": "error", "script": None,
                      "fail_reason": f"{type(exc).__name__}: {exc}", "stats": None}
        result["level"] = task.level
        write_json_atomic(out / "tasks" / f"{task.theorem_id}.json", result)
        return result

    try:
        with ThreadPoolExecutor(max_workers=max(1, args.parallelism)) as pool:
            results = list(pool.map(work, tasks))
        summary = summarize(results)
        write_json_atomic(out / "summary.json", summary)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for lvl, counts in summary.items():
        print(f"{lvl}: {counts['proved']}/{counts['attempted']}")
    return EXIT_PROVED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="promise", description="Retrieval-grounded beam-search prover.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        sp.add_argument("--index")
        sp.add_argument("--backend", choices=["scripted", "http"])

    sp = sub.add_parser("index", help="replay reference proofs into a suffix database")
    sp.add_argument("--theory", required=True)
    sp.add_argument("--out")
    sp.add_argument("--exclude", action="append")
    sp.set_defaults(func=cmd_index)

    sp = sub.add_parser("prove", help="search for a proof of one theorem")
    sp.add_argument("--theory", required=True)
    sp.add_argument("--theorem", required=True)
    sp.add_argument("--log")
    common(sp)
    sp.set_defaults(func=cmd_prove)

    sp = sub.add_parser("bench", help="run a benchmark file")
    sp.add_argument("benchmark", nargs="?", default=str(Path(__file__).parent / "data" / "benchmark.json"))
    sp.add_argument("--parallelism", type=int, default=1)
    sp.add_argument("--theory", help="override every task's theory file")
    common(sp)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
