import json
import os
import random

import pytest

from promise.cli import load_benchmark, main, summarize
from promise.corpus import default_benchmark_path, default_theory_dict, scripted_table
from promise.prover import ToyProver, ToyTheory


@pytest.fixture()
def theory_file(tmp_path):
    path = tmp_path / "theory.json"
    path.write_text(json.dumps(default_theory_dict()), encoding="utf-8")
    return path


def write_config(tmp_path, table, **search):
    table_path = tmp_path / "table.json"
    table_path.write_text(json.dumps({"patterns": [{"pattern": p, "responses": r} for p, r in table],
                                      "default": ""}), encoding="utf-8")
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"search": {"adapt_budgets": False, **search},
                               "backend": {"kind": "scripted", "table": str(table_path)}}), encoding="utf-8")
    return cfg


def test_index_ok(tmp_path, theory_file, capsys):
    out = tmp_path / "idx.json"
    assert main(["index", "--theory", str(theory_file), "--out", str(out)]) == 0
    assert out.exists()
    assert capsys.readouterr().out.strip() == "57 records"


def test_index_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["index", "--theory", str(bad), "--out", str(tmp_path / "i.json")]) == 2


def test_index_unwritable(tmp_path, theory_file):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["index", "--theory", str(theory_file), "--out", str(blocker / "sub" / "i.json")]) == 3


def test_prove_proved(tmp_path, theory_file):
    prover = ToyProver(ToyTheory.load(theory_file))
    cfg = write_config(tmp_path, scripted_table(prover, "double_zero", random.Random(1)), fallbacks=False)
    out = tmp_path / "r.json"
    code = main(["prove", "--theory", str(theory_file), "--theorem", "double_zero", "--config", str(cfg),
                 "--out", str(out), "--log", str(tmp_path / "log.jsonl")])
    result = json.loads(out.read_text())
    assert code == 0 and result["status"] == "proved"
    assert prover.whole_theory_check("double_zero", result["script"])
    assert (tmp_path / "log.jsonl").read_text().strip()


def test_prove_failed(tmp_path, theory_file):
    cfg = write_config(tmp_path, [], fallbacks=False)
    out = tmp_path / "r.json"
    code = main(["prove", "--theory", str(theory_file), "--theorem", "double_zero", "--config", str(cfg),
                 "--out", str(out)])
    result = json.loads(out.read_text())
    assert code == 1 and result["status"] == "failed" and result["fail_reason"] == "beam_exhausted"


def test_prove_unknown(theory_file):
    assert main(["prove", "--theory", str(theory_file), "--theorem", "nope"]) == 4


def test_prove_bad_config(tmp_path, theory_file):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"search": {"beam_wdith": 3}}))
    assert main(["prove", "--theory", str(theory_file), "--theorem", "double_zero", "--config", str(cfg)]) == 2


def test_prove_missing_theory(tmp_path):
    assert main(["prove", "--theory", str(tmp_path / "none.json"), "--theorem", "x"]) == 3


def ten_task_bench(tmp_path, theory_file, missing=True):
    ids = ["add_zero_thm", "zero_add_thm", "double_zero", "inc_one", "pick_true", "suc_inj_thm", "even_two",
           "disj_le", "le_two", "neg_neg"]
    if missing:
        ids[-1] = "not_a_theorem"
    levels = ["P1"] * 6 + ["P2"] * 3 + ["P3"]
    bench = tmp_path / "bench.json"
    bench.write_text(json.dumps([{"theorem_id": t, "level": l, "theory_file": theory_file.name}
                                 for t, l in zip(ids, levels)]))
    return bench


def test_bench_isolation_and_summary(tmp_path, theory_file):
    bench = ten_task_bench(tmp_path, theory_file)
    out = tmp_path / "out"
    assert main(["bench", str(bench), "--out", str(out), "--seed", "3"]) == 0
    tasks = [json.loads((out / "tasks" / f"{t['theorem_id']}.json").read_text())
             for t in json.loads(bench.read_text())]
    assert [t["status"] for t in tasks].count("error") == 1
    assert tasks[-1]["status"] == "error" and tasks[-1]["fail_reason"] == "unknown_theorem"
    assert all(t["status"] in ("proved", "failed") for t in tasks[:-1])
    summary = json.loads((out / "summary.json").read_text())
    assert summary == summarize(tasks)
    assert sum(v["attempted"] for v in summary.values()) == 10


def test_bench_deterministic(tmp_path, theory_file):
    bench = ten_task_bench(tmp_path, theory_file, missing=False)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["bench", str(bench), "--out", str(a), "--seed", "5", "--parallelism", "1"]) == 0
    assert main(["bench", str(bench), "--out", str(b), "--seed", "5", "--parallelism", "1"]) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    for name in sorted(os.listdir(a / "tasks")):
        if name.endswith(".json"):
            ra, rb = (json.loads((d / "tasks" / name).read_text()) for d in (a, b))
            for r in (ra, rb):
                r["stats"] and r["stats"].pop("wall_time")
            assert ra == rb


def test_bench_parallel_matches_sequential_counts(tmp_path, theory_file):
    bench = ten_task_bench(tmp_path, theory_file, missing=False)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["bench", str(bench), "--out", str(a)])
    main(["bench", str(bench), "--out", str(b), "--parallelism", "4"])
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()


def test_bench_bad_level(tmp_path):
    bench = tmp_path / "b.json"
    bench.write_text(json.dumps([{"theorem_id": "x", "level": "P9", "theory_file": "t.json"}]))
    assert main(["bench", str(bench)]) == 2


def test_packaged_benchmark_loads():
    tasks = load_benchmark(default_benchmark_path())
    assert len(tasks) == 22 and {t.level for t in tasks} == {"P1", "P2", "P3"}
