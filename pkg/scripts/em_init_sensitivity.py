"""EM weight estimate from different starting weights, at two stopping tolerances.

    python3 scripts/em_init_sensitivity.py [--alpha 2] [--sigma 4] [--seed 11]
"""

import argparse

from cellinterf.experiments import init_sensitivity

ap = argparse.ArgumentParser()
ap.add_argument("--alpha", type=float, default=2.0)
ap.add_argument("--sigma", type=float, default=4.0)
ap.add_argument("--seed", type=int, default=11)
args = ap.parse_args()

for delta in (1e-6, 1e-9):
    rows = init_sensitivity(args.alpha, args.sigma, delta=delta, seed=args.seed)
    w = [r["w1"] for r in rows]
    cells = "  ".join(f"w1(0)={r['w1_init']}: {r['w1']:.4f} ({r['iterations']} it)" for r in rows)
    print(f"delta={delta:g}  {cells}  spread {max(w) - min(w):.4f}")
