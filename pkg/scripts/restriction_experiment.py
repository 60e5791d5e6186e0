#!/usr/bin/env python3
"""Run the finite-N restriction pipeline and print rates per N.

Type restriction, modular hashing and collision elimination on powers of a
small tight tensor; rates are log2(diagonal size) / N.

    python3 scripts/restriction_experiment.py --w 3 --N 3 6 --trials 20
"""
import argparse

from tensorbounds.engine import flattening_cap, main_lower_bound
from tensorbounds.lab import ExperimentConfig, run_cw_experiment
from tensorbounds.tensors import dicke_tensor, w_tensor


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--w", type=int, help="W-state on k legs")
    src.add_argument("--lambda", dest="lam", help="Dicke partition, e.g. 2,2")
    ap.add_argument("--N", type=int, nargs="+", default=[3, 6])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-hash", action="store_true")
    args = ap.parse_args()

    if args.lam:
        t = dicke_tensor(tuple(int(x) for x in args.lam.split(",")))
    else:
        t = w_tensor(args.w or 3)
    target = main_lower_bound(t).bound
    cap = flattening_cap(t)
    print(f"target bound {target:.6f}, flattening cap {cap:.6f}")
    print(f"{'N':>3} {'|Psi|':>7} {'best':>6} {'rate':>8} {'M':>6}")
    for N in args.N:
        cfg = ExperimentConfig(N=N, trials=args.trials, seed=args.seed, hash=not args.no_hash)
        try:
            rep = run_cw_experiment(t, cfg, target_bound=target, flattening_cap=cap)
        except ValueError as e:
            # uniform types need N * P(s) integral
            print(f"{N:>3} skipped: {e}")
            continue
        print(f"{N:>3} {rep.psi_size:>7} {rep.best_size:>6} {rep.best_rate:8.4f} {rep.M or '-':>6}")


if __name__ == "__main__":
    main()
