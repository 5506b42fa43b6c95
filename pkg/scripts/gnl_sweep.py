"""Monte-Carlo sweep of the multiplicative Lidskii chain.

Writes one CSV row per random pair with both equality gaps and the largest
partial-sum violation of each side, then prints a per-dimension summary.

    python3 scripts/gnl_sweep.py --dims 2 3 4 5 6 --trials 1000 --out gnl.csv
"""

import argparse
import csv
import sys

import numpy as np

from pdorbit.majorization import gnl_verify
from pdorbit.matcore import random_pd


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--max-cond", type=float, default=1e3)
    p.add_argument("--out", default="-")
    args = p.parse_args(argv)

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["d", "trial", "left_gap", "right_gap", "left_violation", "right_violation"])
    for d in args.dims:
        worst = -np.inf
        for k in range(args.trials):
            rng = np.random.default_rng([args.seed, d, k])
            conds = 10 ** rng.uniform(0, np.log10(args.max_cond), 2)
            a = random_pd(d, [args.seed, d, k, 1], conds[0])
            b = random_pd(d, [args.seed, d, k, 2], conds[1])
            r = gnl_verify(a, b)
            worst = max(worst, r.left_violation, r.right_violation)
            w.writerow([d, k, r.left_gap, r.right_gap, r.left_violation, r.right_violation])
        print(f"d={d}: {args.trials} pairs, max violation {worst:.3e}", file=sys.stderr)
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
