"""Measured banged-vs-split infidelity against the summed per-window bound.

    python3 scripts/bound_validation.py --ns 5 6 7 8 --seeds 10
"""
import argparse

import numpy as np

from daqaoa.bounds import bound_report
from daqaoa.problems import Problem, random_erdos_renyi
from daqaoa.resources import ResourceModel, build_resource


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[5, 6, 7, 8])
    ap.add_argument("--alphas", type=float, nargs="+", default=[1e2, 1e3, 1e4])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--p-clause", type=float, default=0.7)
    ap.add_argument("--numeric", action="store_true", help="exact commutator norms instead of the closed form")
    args = ap.parse_args()

    print(f"{'n':>3} {'alpha':>8} {'valid':>6} {'violations':>11} {'max ratio':>10} {'mean bound':>11}")
    for n in args.ns:
        res = build_resource(ResourceModel.homogeneous_model(), n)
        for alpha in args.alphas:
            reps = []
            for seed in range(args.seeds):
                H = Problem.maxcut(random_erdos_renyi(n, args.p_clause, seed)).hamiltonian()
                rng = np.random.default_rng(seed)
                reps.append(bound_report(H, res, alpha, rng.uniform(0, 2 * np.pi, 1), rng.uniform(0, np.pi, 1),
                                         numeric=args.numeric))
            valid = [r for r in reps if r.valid]
            bad = sum(not r.holds() for r in valid)
            ratio = max((r.measured_infidelity / r.sum_sq for r in valid), default=float("nan"))
            bound = np.mean([r.bound for r in valid]) if valid else float("nan")
            print(f"{n:>3} {alpha:>8.0e} {len(valid):>6} {bad:>11} {ratio:>10.3f} {bound:>11.6f}")


if __name__ == "__main__":
    main()
