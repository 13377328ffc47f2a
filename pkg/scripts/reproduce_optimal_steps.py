"""Optimal step-size bounds over an n grid, plus the recovered schedule for one n.

    python3 scripts/reproduce_optimal_steps.py --n 1-5,10,20,40 --show 5
"""

import argparse
import sys

from pepkit.bounds import write_table
from pepkit.cli import RunConfig, optimize_rows, parse_grid
from pepkit.stepopt import recover_steps, render_schedule, solve_lin


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=parse_grid, default=[1, 2, 3, 4, 5, 10, 20, 40])
    ap.add_argument("--show", type=int, default=5, help="print the schedule for this n")
    ap.add_argument("--schedule-dir", default=None)
    ap.add_argument("--plus-sign", action="store_true")
    args = ap.parse_args()

    rows = optimize_rows(RunConfig(n=args.n), args.schedule_dir)
    write_table(rows, sys.stdout, "csv", 6)
    if args.show:
        rec = recover_steps(solve_lin(args.show))
        print(f"\n# n={args.show}, recovered via {rec.path}")
        print(render_schedule(rec.schedule, plus_sign=args.plus_sign))


if __name__ == "__main__":
    main()
