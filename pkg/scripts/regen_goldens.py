"""Rewrite the prompt golden files from the current builder. Review the diff before committing."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from prompt_fixtures import FIXTURES, GOLDEN_DIR, build_fixture_prompt  # noqa: E402
from promise.corpus import default_theory  # noqa: E402
from promise.prover import ToyProver  # noqa: E402
from promise.trace_index import build_index  # noqa: E402


def main():
    prover = ToyProver(default_theory())
    index = build_index(prover)
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name in FIXTURES:
        text, _, _ = build_fixture_prompt(name, prover, index)
        (GOLDEN_DIR / f"{name}.txt").write_bytes(text.encode("utf-8"))
        print(f"wrote {name}.txt ({len(text)} chars)")


if __name__ == "__main__":
    main()
