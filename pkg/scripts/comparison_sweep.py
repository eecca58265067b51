"""Error and inconclusive rates of the three known-state comparison
strategies over a theta grid, written as CSV (plot-ready)."""

import argparse
import csv
import sys

import numpy as np

from aqlab.compare import STRATEGIES
from aqlab.core import derive_rng


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=25)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    # theta = 0 is degenerate for the two-step strategy
    grid = np.linspace(np.pi / 4 / args.points, np.pi / 4, args.points)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["theta", "strategy", "rate", "analytic", "stderr", "unambiguous_errors"])
    for n, theta in enumerate(grid):
        for s, (name, fn) in enumerate(STRATEGIES.items()):
            est = fn(theta, args.trials, derive_rng(args.seed, n, s))
            w.writerow([f"{theta:.12g}", name, f"{est.rate:.12g}", f"{est.analytic:.12g}",
                        f"{est.stderr:.6g}", est.unambiguous_errors])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
