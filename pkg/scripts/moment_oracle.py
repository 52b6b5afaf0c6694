"""Truncated closed-form moments vs Monte-Carlo on the alpha x sigma grid.

    python3 scripts/moment_oracle.py [--n 100000] [--seed 5]
"""

import argparse

from cellinterf.experiments import moment_oracle

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=100_000)
ap.add_argument("--seed", type=int, default=5)
args = ap.parse_args()

print(f"{'alpha':>5} {'sigma':>5} {'mean err':>9} {'var err':>9} {'sec':>6}")
for a in (2.5, 3.0, 4.0):
    for s in (0.0, 4.0, 9.0):
        r = moment_oracle(a, s, args.n, args.seed)
        print(f"{a:5.1f} {s:5.1f} {r['mean_rel_err']:9.4f} {r['var_rel_err']:9.4f} {r['seconds']:6.2f}")
