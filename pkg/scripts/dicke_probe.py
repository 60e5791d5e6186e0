#!/usr/bin/env python3
"""Probe the entropy lower bound on small Dicke tensors.

For each partition the bound is compared with H(lambda/k), the conjectured
value, and with the flattening cap.

    python3 scripts/dicke_probe.py 2,2 1,1,1 2,1,1 3,3
"""
import argparse
import time

from tensorbounds.engine import BoundConfig, closed_form, flattening_cap, main_lower_bound
from tensorbounds.entropy import entropy
from tensorbounds.relations import dicke_symmetry
from tensorbounds.tensors import dicke_tensor


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("partitions", nargs="*", default=["2,2", "2,1", "1,1,1", "3,1", "2,1,1", "3,3"])
    ap.add_argument("--ascent", action="store_true", help="search over P instead of using uniform")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = BoundConfig(strategy="ascent" if args.ascent else "uniform", seed=args.seed)
    print(f"{'lambda':>10} {'bound':>10} {'H(lam/k)':>10} {'cap':>8} {'closed':>14} {'secs':>6}")
    for text in args.partitions:
        lam = tuple(int(x) for x in text.split(","))
        t = dicke_tensor(lam)
        k = sum(lam)
        t0 = time.perf_counter()
        cert = main_lower_bound(t, cfg, symmetry=dicke_symmetry(lam, t))
        dt = time.perf_counter() - t0
        h = entropy([x / k for x in lam])
        cf = closed_form(cert.bound) or "-"
        print(f"{text:>10} {cert.bound:10.6f} {h:10.6f} {flattening_cap(t):8.4f} {cf:>14} {dt:6.2f}")


if __name__ == "__main__":
    main()
