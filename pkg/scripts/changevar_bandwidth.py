"""Leading-symbol mismatch after the change of variables, against symbol scale.

For tau(w) = w/2 + 0.1 sin w and sigma = exp(-(k/lam)^2) the leading-order
composed operator should approach A_{sigma,tau} as lam grows.
"""

import argparse
import math

from tauquant.calculus import changevar_leading
from tauquant.discretize import Grid
from tauquant.quantize import ComplexSymbol
from tauquant.tau import from_spec


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau", default="w/2 + 0.1*sin(w)")
    ap.add_argument("--lams", default="2,4,8,16")
    ap.add_argument("--N", type=int, default=128)
    args = ap.parse_args()

    g = Grid(1, args.N, math.pi)
    tau = from_spec(args.tau, 1)
    for lam in (float(v) for v in args.lams.split(",")):
        _, rep = changevar_leading(ComplexSymbol.parse(f"exp(-((k/{lam})^2))"), tau, g)
        print(f"lam {lam:5g}  relative mismatch {rep['relative_mismatch']:.3e}")


if __name__ == "__main__":
    main()
