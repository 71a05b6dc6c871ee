"""Banged-protocol loss at the ideal optimum and the gain from re-optimising, over (n, alpha).

    python3 scripts/recovery_sweep.py --ns 6 8 --instances 15 --out recovery.csv
"""
import argparse
import csv
import logging

import numpy as np

from daqaoa.qaoa import SweepConfig, bda_performance_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[6, 8])
    ap.add_argument("--alphas", type=float, nargs="+", default=[10**1.5, 1e2, 10**2.5, 1e3, 1e4])
    ap.add_argument("--p", type=int, default=1)
    ap.add_argument("--instances", type=int, default=15)
    ap.add_argument("--p-clause", type=float, default=0.7)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--compensate", action="store_true", help="shorten steered blocks by the steering window")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="recovery.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)

    cfg = SweepConfig(ns=args.ns, alphas=args.alphas, p=args.p, instances=args.instances, p_clause=args.p_clause,
                      seed=args.seed, compensate=args.compensate)
    records = bda_performance_sweep(cfg, workers=args.workers)
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(records[0].row()), lineterminator="\n")
        w.writeheader()
        w.writerows(r.row() for r in records)

    print(f"{'n':>3} {'alpha':>9} {'fixed %':>9} {'re-opt gain %':>14}")
    for n in cfg.ns:
        for a in cfg.alphas:
            rows = [r for r in records if r.n == n and r.alpha == a]
            print(f"{n:>3} {a:>9.4g} {np.mean([r.pct_fixed_change for r in rows]):>9.3f} "
                  f"{np.mean([r.pct_reopt_gain for r in rows]):>14.3f}")


if __name__ == "__main__":
    main()
