"""Print a per-task table from a ``promise bench`` output directory."""
import json
import sys
from pathlib import Path


def main(out_dir="bench_out"):
    out = Path(out_dir)
    rows = [json.loads(p.read_text(encoding="utf-8")) for p in sorted((out / "tasks").glob("*.json"))]
    print(f"{'theorem':<18} {'lvl':<3} {'status':<7} {'reason':<16} {'queries':>7} {'probes':>6} {'hits':>4}")
    for r in sorted(rows, key=lambda r: (r["level"], r["theorem_id"])):
        s = r.get("stats") or {}
        print(f"{r['theorem_id']:<18} {r['level']:<3} {r['status']:<7} {str(r['fail_reason'] or ''):<16} "
              f"{s.get('llm_queries', ''):>7} {s.get('prover_probes', ''):>6} {s.get('cache_hits', ''):>4}")
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    print(" ".join(f"{lvl} {c['proved']}/{c['attempted']}" for lvl, c in summary.items()))


if __name__ == "__main__":
    main(*sys.argv[1:])
