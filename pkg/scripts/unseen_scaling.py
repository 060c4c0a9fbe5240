#!/usr/bin/env python3
"""Query-complexity scaling of the unseen entropy estimator.

For each qubit count n, scans sample counts on a geometric grid and reports
N*: the smallest N at which at least 90% of seeded runs estimate the
entropy of the white-noise channel within 0.5 bits.  N* should grow like
4^n/n.

Run: python3 scripts/unseen_scaling.py [--nmin 4 --nmax 6 --seeds 40]
"""

from __future__ import annotations

import argparse
import json
import math

from paulikit.core import uniform_channel
from paulikit.quantum import draw_samples
from paulikit.unseen import estimate_entropy_unseen


def minimal_sample_count(n: int, seeds: int, master_seed: int,
                         tolerance: float = 0.5, target: float = 0.9) -> int:
    k = 4**n
    channel = uniform_channel(n)
    N = max(8, int(k / math.log(k) * 0.10))
    while True:
        hits = 0
        for s in range(seeds):
            batch = draw_samples(channel, N, (master_seed, n, N, s))
            if abs(estimate_entropy_unseen(batch, k) - 2 * n) < tolerance:
                hits += 1
        if hits / seeds >= target:
            return N
        N = max(N + 1, int(N * 1.12))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nmin", type=int, default=4)
    parser.add_argument("--nmax", type=int, default=6)
    parser.add_argument("--seeds", type=int, default=40)
    parser.add_argument("--seed", type=int, default=601)
    args = parser.parse_args()

    rows = []
    for n in range(args.nmin, args.nmax + 1):
        n_star = minimal_sample_count(n, args.seeds, args.seed)
        rows.append({
            "n": n,
            "N_star": n_star,
            "ideal": 4**n / n,
            "constant": n_star / (4**n / n),
        })
    print(json.dumps(rows, indent=2))


if __name__ == "__main__":
    main()
