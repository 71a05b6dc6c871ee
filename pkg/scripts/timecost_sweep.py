"""Compiled DA time per resource family versus graph size, with the gate-based baseline.

    python3 scripts/timecost_sweep.py --ns 6 8 10 12 14 --seeds 20 --out timecost.csv
"""
import argparse
import csv
import logging

import numpy as np

from daqaoa.costs import REFERENCE_MODELS, cell_means, comparison_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[6, 8, 10, 12, 14])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--p-clause", type=float, default=0.75)
    ap.add_argument("--t-x", type=float, default=0.0, help="time per X gate added to the stepwise total")
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--out", default="timecost.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)

    reports = comparison_sweep(args.ns, p_clause=args.p_clause, seeds=range(args.seeds), t_x=args.t_x,
                               base_seed=args.base_seed)
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(reports[0].row()), lineterminator="\n")
        w.writeheader()
        w.writerows(r.row() for r in reports)

    means = cell_means(reports)
    labels = [m.label for m in REFERENCE_MODELS]
    print("n    " + "  ".join(f"{lab:>14}" for lab in labels) + "  digital_steps")
    for n in args.ns:
        steps = np.mean([r.digital_steps for r in reports if r.n == n and r.model == labels[0]])
        print(f"{n:<4} " + "  ".join(f"{means.get((n, lab), float('nan')):14.4g}" for lab in labels) + f"  {steps:.2f}")


if __name__ == "__main__":
    main()
