"""Gap report for the conjectured tight gradient-method factor over an (n, h) grid.

Nothing here is asserted; rows list the conjectured value, the relaxed dual
value and what the two extremal functions actually attain.
"""

import argparse
import sys

import numpy as np

from pepkit.bounds import conjecture_explorer, write_table
from pepkit.cli import parse_grid


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=parse_grid, default=[1, 2, 3, 5, 10, 20])
    ap.add_argument("--h", type=float, nargs="+", default=list(np.round(np.arange(0.1, 2.0, 0.1), 2)))
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    rows = [conjecture_explorer(n, h).to_dict() for n in args.n for h in args.h]
    write_table(rows, args.out or sys.stdout, "csv", 8)
    worst = max(rows, key=lambda r: abs(r["gap_numeric_vs_conjectured"]))
    print(f"# largest |numeric - conjectured| = {worst['gap_numeric_vs_conjectured']:.3e} "
          f"at n={worst['n']} h={worst['h']}", file=sys.stderr)


if __name__ == "__main__":
    main()
