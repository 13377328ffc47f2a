"""Inverse bound factors of HBM and both FGM sequences next to the classical FGM rate.

    python3 scripts/reproduce_bound_tables.py --n 1-5,10,20,40 --out bounds.csv
"""

import argparse
import sys
import time

from pepkit.bounds import write_table
from pepkit.cli import METHOD_TABLE_N, RunConfig, methods_table, parse_grid


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=parse_grid, default=METHOD_TABLE_N)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--digits", type=int, default=6)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    t0 = time.perf_counter()
    rows = methods_table(RunConfig(n=args.n, alpha=args.alpha, beta=args.beta, digits=args.digits))
    write_table(rows, args.out or sys.stdout, "csv", args.digits)
    print(f"# {len(rows)} rows in {time.perf_counter() - t0:.1f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
