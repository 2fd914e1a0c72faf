"""Write a scripted-backend table for a theory: reference steps plus seeded distractors per goal.

    python3 scripts/make_scripted_table.py --theory src/promise/data/toy_theory.json --out table.json
"""
import argparse
import json
import random

from promise.corpus import scripted_table
from promise.prover import ToyProver, ToyTheory


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--theory", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--distractors", type=int, default=3)
    args = ap.parse_args()
    prover = ToyProver(ToyTheory.load(args.theory))
    rng = random.Random(args.seed)
    patterns = []
    for thm in prover.theory.theorems:
        patterns.extend({"pattern": p, "responses": r}
                        for p, r in scripted_table(prover, thm, rng, args.distractors))
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump({"patterns": patterns, "default": ""}, fh, indent=2, ensure_ascii=False)
    print(f"{len(patterns)} patterns")


if __name__ == "__main__":
    main()
