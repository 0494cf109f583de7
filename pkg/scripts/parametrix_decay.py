"""Band residual of the parametrix for (2 + sin x)(1 + k^2) as M grows."""

import argparse
import math
import time

from tauquant.calculus import parametrix, parametrix_residual
from tauquant.discretize import Grid
from tauquant.quantize import ComplexSymbol, op_symbol
from tauquant.tau import make_preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=128)
    ap.add_argument("--L", type=float, default=2 * math.pi)
    ap.add_argument("--R0", type=float, default=4.0)
    ap.add_argument("--taus", default="kn,weyl")
    ap.add_argument("--max-order", type=int, default=3)
    args = ap.parse_args()

    g = Grid(1, args.N, args.L)
    s = ComplexSymbol.parse("(2+sin(x))*(1+k^2)")
    for name in args.taus.split(","):
        tau = make_preset(name, 1)
        A = op_symbol(s, tau, g).matrix
        for M in range(1, args.max_order + 1):
            t0 = time.time()
            kappa = parametrix(s, tau, 2, M, args.R0)
            K = op_symbol(kappa, tau, g).matrix
            res = parametrix_residual(K @ A, g, args.R0)
            print(f"{name:5s} M={M}  residual {res:.4e}  nodes {kappa.node_count():6d}  "
                  f"{time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
