#!/usr/bin/env python3
"""Print the complete-graph exponent table next to the CW-type scan.

    python3 scripts/reproduce_table.py --kmax 10
"""
import argparse
import csv
import sys

from tensorbounds.exponents import OMEGA_MM, TABLE_COLUMNS, complete_graph_table, cw_tau_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kmax", type=int, default=10)
    ap.add_argument("--qm", type=float, default=1.0, help="subexponent of D_(k-2,2) fed to the CW bound")
    ap.add_argument("--omega-mm", type=float, default=OMEGA_MM)
    args = ap.parse_args()

    q, tau = cw_tau_bound(4, args.qm)
    print(f"# CW bound: q*={q}, tau*={tau:.9f}", file=sys.stderr)
    rows = complete_graph_table(args.kmax, args.omega_mm, args.qm)
    w = csv.writer(sys.stdout)
    w.writerow(TABLE_COLUMNS)
    for r in rows:
        cells = r.cells()
        w.writerow([cells[c] for c in TABLE_COLUMNS])


if __name__ == "__main__":
    main()
