"""Mixture parameters from the shipped coefficient table, with domain checks.

    python3 scripts/table1_check.py [--p-dbm 30]
"""

import argparse

from cellinterf.experiments import table_check
from cellinterf.funcfit import TableRangeError, table1_lookup, table_alphas

ap = argparse.ArgumentParser()
ap.add_argument("--p-dbm", type=float, default=30.0)
args = ap.parse_args()

print(table_check())
for a in table_alphas():
    for s in (0.0, 3.0, 6.0, 9.0):
        try:
            p = table1_lookup(a, s, args.p_dbm)
            print(f"alpha={a:g} sigma={s:g}: w1={p.w1:.4f} c={p.iw.c:.4f} lam={p.ig.lam:.3e} mu={p.ig.mu:.3e}")
        except TableRangeError as exc:
            print(f"alpha={a:g} sigma={s:g}: out of domain ({exc})")
