#!/usr/bin/env python3
"""Calibrate the uniformity-test planning multipliers.

The planner expressions fix scaling only; this script sweeps the multiplier
c_plan and measures empirical type-I (uniform channel) and type-II (identity
channel, the farthest-from-uniform case) error rates at the acceptance
operating point n=2, eps=0.5, for p in {1, 2, inf}.  The defaults recorded
in ``tester.CALIBRATED_C_PLAN`` are the smallest round values for which both
rates stay comfortably below the 1/3 budget across all three norms.

Run: python3 scripts/calibrate_tester.py [--trials 400] [--seed 7]
"""

from __future__ import annotations

import argparse
import math

from paulikit.core import identity_channel, uniform_channel
from paulikit.tester import run_test_roc


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=400)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--n", type=int, default=2)
    parser.add_argument("--eps", type=float, default=0.5)
    args = parser.parse_args()

    uniform = uniform_channel(args.n)
    identity = identity_channel(args.n)

    for p in (1.0, 2.0, math.inf):
        print(f"p = {p}")
        for c_plan in (1.0, 2.0, 4.0, 6.0, 8.0, 16.0, 32.0):
            null = run_test_roc(uniform, p, args.eps, args.trials,
                                (args.seed, 0), c_plan=c_plan)
            alt = run_test_roc(identity, p, args.eps, args.trials,
                               (args.seed, 1), c_plan=c_plan)
            print(
                f"  c_plan={c_plan:5.1f}  N={null.N:5d}  "
                f"type-I={null.type_i_rate:.3f}  type-II={alt.type_ii_rate:.3f}"
            )


if __name__ == "__main__":
    main()
