"""Larger-n rows of the method and optimal-step tables (not part of acceptance).

    python3 scripts/stretch_rows.py --n 80,160
"""

import argparse
import sys
import time

from pepkit.bounds import numeric_bound
from pepkit.cli import parse_grid
from pepkit.schedule import fgm_schedule, hbm_schedule
from pepkit.stepopt import solve_lin


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=parse_grid, default=[80])
    ap.add_argument("--lin-max", type=int, default=80,
                    help="largest n for the step-design SDP; its Schur matrix grows like n^4")
    args = ap.parse_args()
    print("n,hbm,fgm_main,fgm_aux,optimal,seconds")
    for n in args.n:
        t0 = time.perf_counter()
        hb = numeric_bound(hbm_schedule(n, 1.0, 0.5)).inverse_factor
        fm = numeric_bound(fgm_schedule(n, "main")).inverse_factor
        fa = numeric_bound(fgm_schedule(n, "aux")).inverse_factor
        lin = solve_lin(n).inverse_factor if n <= args.lin_max else float("nan")
        print(f"{n},{hb:.2f},{fm:.2f},{fa:.2f},{lin:.2f},{time.perf_counter() - t0:.1f}")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
