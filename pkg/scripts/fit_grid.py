"""KL of every estimator on an alpha x sigma grid, plus the fitted mixture.

    python3 scripts/fit_grid.py [--n 100000] [--out grid.json]
"""

import argparse
from pathlib import Path

from cellinterf.experiments import FIT_METHODS, fit_grid
from cellinterf.sampleio import dumps_json

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=100_000)
ap.add_argument("--seed", type=int, default=11)
ap.add_argument("--alphas", type=float, nargs="+", default=[2.0, 3.0, 3.5, 4.0])
ap.add_argument("--sigmas", type=float, nargs="+", default=[0.0, 3.0, 6.0, 9.0])
ap.add_argument("--out")
args = ap.parse_args()

rows = fit_grid(args.alphas, args.sigmas, args.n, args.seed)
head = " ".join(f"{m:>10}" for m in FIT_METHODS)
print(f"{'alpha':>5} {'sigma':>5} {head} {'w1':>6} {'iters':>5}")
for r in rows:
    kls = " ".join(f"{r['kl_' + m]:10.4f}" for m in FIT_METHODS)
    print(f"{r['alpha']:5.1f} {r['sigma_sf_db']:5.1f} {kls} {r['w1']:6.3f} {r['em_iterations']:5d}")
if args.out:
    Path(args.out).write_text(dumps_json(rows))
