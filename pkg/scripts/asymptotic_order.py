"""Defect of truncated Weyl -> Kohn-Nirenberg expansions under frequency dilation.

For sigma_lam = sin(x) g(k/lam) the defect of the order-M expansion should
shrink by about 2^-M each time lam doubles.
"""

import argparse
import math

from tauquant.calculus import convert_quantization
from tauquant.discretize import Grid
from tauquant.estimates import operator_defect, probe_defect
from tauquant.quantize import ComplexSymbol, op_symbol
from tauquant.tau import make_preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=256)
    ap.add_argument("--L", type=float, default=math.pi)
    ap.add_argument("--orders", default="1,2,3")
    ap.add_argument("--lams", default="4,8,16")
    args = ap.parse_args()

    g = Grid(1, args.N, args.L)
    weyl, kn = make_preset("weyl", 1), make_preset("kn", 1)
    lams = [float(v) for v in args.lams.split(",")]
    print("M  lam   op-defect   probe-defect  ratio   target")
    for M in (int(v) for v in args.orders.split(",")):
        prev = None
        for lam in lams:
            s = ComplexSymbol.parse(f"sin(x)*exp(-((k/{lam})^2))")
            A = op_symbol(s, weyl, g)
            B = convert_quantization(s, weyl, kn, M).operator(g)
            d = operator_defect(A, B)
            ratio = "" if prev is None else f"{d / prev:.3f}"
            print(f"{M}  {lam:4g}  {d:.3e}   {probe_defect(A, B, g):.3e}    {ratio:6s}  {2.0**-M:g}")
            prev = d


if __name__ == "__main__":
    main()
