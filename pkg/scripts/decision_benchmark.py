"""Threshold-decision benchmark across the four sequential methods.

For a fixed stream mean q, every grid threshold p gets `trials` runs of
each method; the digest prints mean sample counts at a thinned set of
thresholds plus total wrong/undecided verdicts.  The oracle SPRT knows
both p and q and lower-bounds everything; the staged baseline pays for
its fixed inspection times away from them.
"""

from __future__ import annotations

import argparse
from collections import Counter

import numpy as np

from anytime.decision import METHODS, benchmark_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=float, default=0.91, help="true stream mean")
    ap.add_argument("--alpha", type=float, default=0.001)
    ap.add_argument("--points", type=int, default=51)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--cap", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    grid = np.linspace(0.0, 1.0, args.points)
    records, summaries = benchmark_sweep(
        q=args.q, alpha=args.alpha, grid=grid, trials=args.trials,
        cap=args.cap, seed=args.seed,
    )

    mean = {(s.method, round(s.p, 10)): s.mean_samples for s in summaries}
    shown = [round(float(p), 10) for p in grid[:: max(1, args.points // 10)]]
    header = "p".rjust(6) + "".join(m.rjust(12) for m in METHODS)
    print(header)
    for p in shown:
        cells = "".join(f"{mean[(m, p)]:12.1f}" for m in METHODS)
        print(f"{p:6.2f}{cells}")

    wrong = Counter(r.method for r in records if r.is_wrong())
    undecided = Counter(
        r.method for r in records if r.verdict.value in ("undecided", "abstain")
    )
    total = args.trials * args.points
    print()
    for m in METHODS:
        print(
            f"{m}: wrong {wrong.get(m, 0)}/{total}, "
            f"undecided {undecided.get(m, 0)}/{total}"
        )


if __name__ == "__main__":
    main()
