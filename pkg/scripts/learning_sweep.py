#!/usr/bin/env python3
"""Learning-error scaling sweep.

Runs the empirical learner over a geometric grid of sample counts at n=3
and fits the log-log slope of the median l1 error, which should sit at
-1/2; also reports the max-norm medians at fixed N for n=2 vs n=5, which
should coincide for channels whose heavy coordinates do not move with n.

Run: python3 scripts/learning_sweep.py --out /tmp/learning_sweep
"""

from __future__ import annotations

import argparse
import json

from paulikit.bench import ExperimentConfig, fit_scaling, run_experiment, write_report


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--trials", type=int, default=60)
    parser.add_argument("--seed", type=int, default=500)
    args = parser.parse_args()

    config = ExperimentConfig.from_dict({
        "task": "learn",
        "channels": [{"preset": "depolarizing", "n": 3, "q": 0.3}],
        "grid": [
            {"channel": 0, "p": 1, "epsilon": 0.3, "delta": 0.3333333333333333,
             "N": 2**e}
            for e in range(8, 17)
        ],
        "trials": args.trials,
        "master_seed": args.seed,
    })
    report = run_experiment(config)
    paths = write_report(report, args.out)
    fit = fit_scaling(report, "N", "error_median")
    print(json.dumps({"fit": fit, "report": str(paths[0])}, indent=2))


if __name__ == "__main__":
    main()
