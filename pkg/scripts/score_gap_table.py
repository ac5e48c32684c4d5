#!/usr/bin/env python3
"""Tabulate the reward gap between outcomes for binary reports.

For a two-outcome report (p, 1-p), the gap s(p; 1) - s(p; 2) is what an
expert stands to gain if the first outcome happens rather than the
second.  The quadratic rule's gap is linear in p; the logarithmic
rule's (scaled by 1/(2 ln 2) to equalize the two rules' expected-reward
ranges) moves slowly in the middle and steeply near the ends.

Writes CSV rows: p, quadratic_gap, scaled_log_gap.
"""

import argparse
import csv
import math
import sys

import numpy as np

from qapool import RuleSpec, score


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=99, help="grid size")
    parser.add_argument("--out", help="CSV path (default: stdout)")
    args = parser.parse_args()

    quad, log = RuleSpec.quadratic(), RuleSpec.logarithmic()
    scale = 1.0 / (2.0 * math.log(2.0))
    rows = []
    for p in np.linspace(0.01, 0.99, args.points):
        f = [p, 1.0 - p]
        rows.append(
            (
                round(float(p), 6),
                score(quad, f, 1) - score(quad, f, 2),
                scale * (score(log, f, 1) - score(log, f, 2)),
            )
        )

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["p", "quadratic_gap", "scaled_log_gap"])
    writer.writerows(rows)
    if args.out:
        out.close()
        mid = rows[len(rows) // 2]
        print(f"wrote {len(rows)} rows to {args.out}; at p=0.5 gaps are "
              f"{mid[1]:.3f} / {mid[2]:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
