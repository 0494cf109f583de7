"""Calibrate the constant in ||A_a|| <= C M(a) and test it on fresh seeds.

Prints the per-seed ratios, the calibrated constant and how many fresh
amplitudes exceed it.
"""

import argparse
import math

import numpy as np

from tauquant.discretize import Grid
from tauquant.estimates import cv_bound, operator_norm
from tauquant.quantize import ComplexSymbol, op_amplitude


def family(seed: int) -> ComplexSymbol:
    r = np.random.default_rng(seed)
    re, im = [], []
    for _ in range(3):
        p, q = r.integers(-1, 2, size=2)
        c = r.uniform(-1, 1, 2)
        mu, s, ph = r.uniform(-8, 8), r.uniform(2, 4), r.uniform(0, 2 * math.pi)
        band = f"exp(-(((k - ({mu:.6f}))/{s:.6f})^2))"
        arg = f"({p}*x + ({q})*y + {ph:.6f})"
        re.append(f"({c[0]:.6f})*cos{arg}*{band}")
        im.append(f"({c[1]:.6f})*sin{arg}*{band}")
    return ComplexSymbol.parse(" + ".join(re), " + ".join(im))


def ratio(seed: int, g: Grid) -> float:
    a = family(seed)
    return operator_norm(op_amplitude(a, g)).norm / cv_bound(a, 1, box=(math.pi, math.pi, 24.0)).M_val


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--calibration", type=int, default=20)
    ap.add_argument("--fresh-start", type=int, default=1000)
    ap.add_argument("--fresh", type=int, default=20)
    ap.add_argument("--N", type=int, default=128)
    args = ap.parse_args()

    g = Grid(1, args.N, math.pi)
    cal = [ratio(s, g) for s in range(args.calibration)]
    C = max(cal)
    fresh = [ratio(s, g) for s in range(args.fresh_start, args.fresh_start + args.fresh)]
    print("calibration ratios", np.round(cal, 4).tolist())
    print("fresh ratios      ", np.round(fresh, 4).tolist())
    above = sum(r > C for r in fresh)
    print(f"C_cal {C:.4f}; worst fresh {max(fresh):.4f}; {above} of {len(fresh)} above")


if __name__ == "__main__":
    main()
