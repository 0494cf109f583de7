"""Exact tables of symmetry functions and midpoints on a small rational lattice."""

import argparse
import itertools
from fractions import Fraction

from tauquant.heisenberg import (HeisPoint, check_symmetry, midpoint, midpoint_closed,
                                 symmetry_tau)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--range", type=int, default=2, help="coordinates in [-r, r] with step 1/2")
    args = ap.parse_args()

    vals = [Fraction(i, 2) for i in range(-2 * args.range, 2 * args.range + 1)]
    for variant in ("standard", "polarised"):
        total = sym_ok = 0
        for a, b, c in itertools.product(vals, repeat=3):
            p = HeisPoint(a, b, c, variant)
            total += 1
            sym_ok += check_symmetry(p)
        print(f"{variant}: symmetry identity holds at {sym_ok}/{total} lattice points")
        for p in ((1, 0, 0), (0, 1, 0), (1, 1, 0), (2, 3, 1)):
            print(f"  tau{p} = ({symmetry_tau(HeisPoint(*p, variant=variant))})")
    pairs = [((1, 0, 0), (0, 1, 0)), ((1, 2, 5), (-1, -2, -5)), ((1, 2, 3), (1, 7, 9))]
    for x, y in pairs:
        X, Y = HeisPoint(*x), HeisPoint(*y)
        print(f"m{x},{y} = ({midpoint(X, Y)})  closed ({midpoint_closed(X, Y)})")


if __name__ == "__main__":
    main()
