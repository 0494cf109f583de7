"""
Exact arithmetic on the three-dimensional Heisenberg group.

Two coordinate systems are supported:

``polarised``
    (a, b, c) is the upper-triangular matrix [[1, a, c], [0, 1, b], [0, 0, 1]];
    the product is (a+u, b+v, c+s+a*v).
``standard``
    (a, b, c) are exponential coordinates with product
    (a+u, b+v, c+s+(u*b - v*a)/2); the matrix has corner entry c + a*b/2.

All coordinates are :class:`fractions.Fraction`, so every identity is checked
with zero tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "HeisPoint",
    "VARIANTS",
    "group_op",
    "mul",
    "inv",
    "identity_matrix",
    "to_matrix",
    "from_matrix",
    "exp_log",
    "symmetry_tau",
    "symmetry_tau_closed",
    "midpoint",
    "midpoint_closed",
    "midpoint_report",
    "check_symmetry",
    "pullback_components",
    "format_fraction",
    "parse_point",
]

VARIANTS = ("polarised", "standard")

Matrix = tuple  # 3x3 tuple of tuples of Fraction


def _frac(v) -> Fraction:
    if isinstance(v, float):
        raise TypeError("Heisenberg coordinates must be exact (int, str or Fraction)")
    return Fraction(v)


@dataclass(frozen=True)
class HeisPoint:
    """A group element (a, b, c) in the given coordinate variant."""

    a: Fraction
    b: Fraction
    c: Fraction
    variant: str = "standard"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        for name in "abc":
            object.__setattr__(self, name, _frac(getattr(self, name)))

    @property
    def coords(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c)

    def __str__(self) -> str:
        return ", ".join(format_fraction(v) for v in self.coords)


def format_fraction(v: Fraction) -> str:
    return f"{v.numerator}" if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def parse_point(text: str, variant: str) -> HeisPoint:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three coordinates, got {text!r}")
    return HeisPoint(*(Fraction(p) for p in parts), variant=variant)


def _same(p: HeisPoint, q: HeisPoint) -> None:
    if p.variant != q.variant:
        raise ValueError(f"variant mismatch: {p.variant} vs {q.variant}")


def mul(p: HeisPoint, q: HeisPoint) -> HeisPoint:
    _same(p, q)
    a, b, c = p.coords
    u, v, s = q.coords
    if p.variant == "polarised":
        top = c + s + a * v
    else:
        top = c + s + (u * b - v * a) / 2
    return HeisPoint(a + u, b + v, top, p.variant)


def inv(p: HeisPoint) -> HeisPoint:
    a, b, c = p.coords
    if p.variant == "polarised":
        return HeisPoint(-a, -b, -c + a * b, p.variant)
    return HeisPoint(-a, -b, -c, p.variant)


def group_op(p: HeisPoint, q: HeisPoint | None = None, op: str = "mul") -> HeisPoint:
    """Group product ``p*q`` (``op="mul"``) or inverse of ``p`` (``op="inv"``)."""
    if op == "mul":
        if q is None:
            raise ValueError("mul needs two points")
        return mul(p, q)
    if op == "inv":
        return inv(p)
    raise ValueError(f"unknown group operation {op!r}")


# ---------------------------------------------------------------------------
# Matrices


def identity_matrix() -> Matrix:
    one, zero = Fraction(1), Fraction(0)
    return ((one, zero, zero), (zero, one, zero), (zero, zero, one))


def _zero_matrix() -> Matrix:
    z = Fraction(0)
    return ((z, z, z), (z, z, z), (z, z, z))


def _mm(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(sum((A[i][k] * B[k][j] for k in range(3)), Fraction(0))
                       for j in range(3)) for i in range(3))


def _madd(A: Matrix, B: Matrix, scale=1) -> Matrix:
    return tuple(tuple(A[i][j] + scale * B[i][j] for j in range(3)) for i in range(3))


def _mscale(A: Matrix, s) -> Matrix:
    return tuple(tuple(s * A[i][j] for j in range(3)) for i in range(3))


def _check_upper(M: Matrix, diag: Fraction) -> Matrix:
    if len(M) != 3 or any(len(row) != 3 for row in M):
        raise ValueError("expected a 3x3 matrix")
    M = tuple(tuple(_frac(v) for v in row) for row in M)
    for i in range(3):
        if M[i][i] != diag:
            raise ValueError(f"diagonal must be {diag}")
        for j in range(i):
            if M[i][j] != 0:
                raise ValueError("matrix must be upper triangular")
    return M


def to_matrix(p: HeisPoint) -> Matrix:
    """Unipotent matrix of ``p``.

    Polarised points multiply like their matrices.  Standard points use
    exponential coordinates, and their law ``c + s + (ub - va)/2`` is the matrix
    product in reverse order.
    """
    a, b, c = p.coords
    corner = c if p.variant == "polarised" else c + a * b / 2
    one, zero = Fraction(1), Fraction(0)
    return ((one, a, corner), (zero, one, b), (zero, zero, one))


def from_matrix(M: Matrix, variant: str) -> HeisPoint:
    M = _check_upper(M, Fraction(1))
    a, b, corner = M[0][1], M[1][2], M[0][2]
    c = corner if variant == "polarised" else corner - a * b / 2
    return HeisPoint(a, b, c, variant)


def exp_log(M: Matrix, direction: str) -> Matrix:
    """Exact matrix exponential (algebra -> group) or logarithm (group -> algebra).

    Strictly upper-triangular 3x3 matrices cube to zero, so both series stop
    after the quadratic term.
    """
    if direction == "exp":
        X = _check_upper(M, Fraction(0))
        return _madd(_madd(identity_matrix(), X), _mm(X, X), Fraction(1, 2))
    if direction == "log":
        G = _check_upper(M, Fraction(1))
        Nm = _madd(G, identity_matrix(), -1)
        return _madd(Nm, _mm(Nm, Nm), Fraction(-1, 2))
    raise ValueError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# Symmetry function and midpoint


def _integrate_exp_path(X: Matrix) -> Matrix:
    """int_0^1 exp(sX) ds, integrating the polynomial in s term by term."""
    # exp(sX) = sum_k s^k X^k / k!  and X^3 = 0; int_0^1 s^k ds = 1/(k+1)
    terms = [identity_matrix(), X, _mm(X, X)]
    out = _zero_matrix()
    fact = 1
    for k, Xk in enumerate(terms):
        fact *= max(k, 1)
        out = _madd(out, Xk, Fraction(1, fact * (k + 1)))
    return out


def symmetry_tau(p: HeisPoint, method: str = "integral") -> HeisPoint:
    """Symmetry function tau(x) = int_0^1 exp(s log x) ds.

    The integral is a matrix whose entries (0,1), (1,2), (0,2) are returned as
    the coordinates (a, b, c), in both variants.
    """
    if method == "closed":
        return symmetry_tau_closed(p)
    if method != "integral":
        raise ValueError(f"unknown method {method!r}")
    T = _integrate_exp_path(exp_log(to_matrix(p), "log"))
    return HeisPoint(T[0][1], T[1][2], T[0][2], p.variant)


def symmetry_tau_closed(p: HeisPoint) -> HeisPoint:
    a, b, c = p.coords
    if p.variant == "polarised":
        return HeisPoint(a / 2, b / 2, c / 2 - a * b / 12, p.variant)
    return HeisPoint(a / 2, b / 2, c / 2 + a * b / 6, p.variant)


def pullback_components(variant: str) -> list[str]:
    """The closed-form symmetry function as expressions in ``w1, w2, w3``."""
    if variant == "polarised":
        return ["w1/2", "w2/2", "w3/2 - w1*w2/12"]
    if variant == "standard":
        return ["w1/2", "w2/2", "w3/2 + w1*w2/6"]
    raise ValueError(f"unknown variant {variant!r}")


def check_symmetry(p: HeisPoint, method: str = "integral") -> bool:
    """Whether tau(p) == tau(p^-1) * p holds exactly."""
    lhs = symmetry_tau(p, method)
    rhs = mul(symmetry_tau(inv(p), method), p)
    return lhs == rhs


def midpoint(x: HeisPoint, y: HeisPoint, method: str = "integral") -> HeisPoint:
    """m(x, y) = x * tau(y^-1 x)^-1 through group operations."""
    _same(x, y)
    return mul(x, inv(symmetry_tau(mul(inv(y), x), method)))


def midpoint_closed(x: HeisPoint, y: HeisPoint) -> HeisPoint:
    _same(x, y)
    a1, b1, c1 = x.coords
    a2, b2, c2 = y.coords
    return HeisPoint((a1 + a2) / 2, (b1 + b2) / 2,
                     (c1 + c2) / 2 - (a1 - a2) * (b1 - b2) / 6, x.variant)


def midpoint_report(x: HeisPoint, y: HeisPoint) -> dict:
    """Both midpoint computations and whether they agree.

    The closed form is established for the standard variant; for the
    polarised variant it is reported with ``extrapolated=True``.
    """
    group = midpoint(x, y)
    closed = midpoint_closed(x, y)
    return {
        "variant": x.variant,
        "group": [format_fraction(v) for v in group.coords],
        "closed": [format_fraction(v) for v in closed.coords],
        "agree": group == closed,
        "extrapolated": x.variant != "standard",
    }
