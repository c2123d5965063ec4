"""Compare evaluator matching with the brute-force oracle on random diagram pairs.

    python3 scripts/oracle_sweep.py --pairs 5000 --seed 1
"""

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

import gen  # noqa: E402
import oracle  # noqa: E402
from nomad.evaluator import evaluate, match  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-classes", type=int, default=6)
    ap.add_argument("--max-rels", type=int, default=8)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    mismatches = dominance = 0
    start = time.perf_counter()
    for _ in range(args.pairs):
        g, m = gen.random_pair(rng, args.max_classes, args.max_rels)
        res = match(g, m)
        same = (
            res.matched_classes == oracle.classes(g, m)
            and res.matched_attributes == oracle.attributes(g, m)
            and res.matched_relationships_hard == oracle.hard(g, m)
            and res.matched_relationships_soft == oracle.soft(g, m)
            and res.matched_generated_soft == oracle.soft_generated(g, m)
        )
        mismatches += not same
        r = evaluate(g, m)
        dominance += r.relationships_relaxed.f1 < r.relationships_strict.f1
    elapsed = time.perf_counter() - start
    print(f"pairs={args.pairs} mismatches={mismatches} dominance_violations={dominance} time={elapsed:.2f}s")
    raise SystemExit(1 if mismatches or dominance else 0)


if __name__ == "__main__":
    main()
