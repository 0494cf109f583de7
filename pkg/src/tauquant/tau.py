"""
Quantizing functions tau: presets, admissibility probes, duals, Taylor data
and inversion of the maps ``tau_x(y) = x + tau(y - x)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
from scipy.stats import qmc

from . import symexpr as se
from .symexpr import SymbolExpr

__all__ = [
    "QuantizingFunction",
    "TaylorData",
    "AdmissibilityReport",
    "NewtonError",
    "make_preset",
    "from_spec",
    "dual",
    "check_admissible",
    "taylor",
    "invert_tau_x",
    "invert_tau_x_batch",
    "multi_indices",
]

_TOL_ZERO = 1e-12
GAUSS_NODES = 40


class NewtonError(RuntimeError):
    pass


def multi_indices(n: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices of length ``n`` and total order ``order``, sorted."""
    out = [a for a in itertools.product(range(order + 1), repeat=n) if sum(a) == order]
    return sorted(out)


def multi_factorial(alpha) -> int:
    if sum(alpha) > 12:
        raise OverflowError("multi-index order above 12")
    return math.prod(math.factorial(a) for a in alpha)


@dataclass(frozen=True)
class QuantizingFunction:
    """A map tau: R^n -> R^n with tau(0) = 0.

    Parameters
    ----------
    components : tuple of SymbolExpr
        One expression per output coordinate, in the variables ``w`` (n = 1)
        or ``w1..wn``.
    name : str
        Preset tag (``kn``, ``akn``, ``weyl``, ``linear:<s>``) or ``custom``.
    order : float or None
        Declared admissibility order mu, if known.
    bounded : bool
        Declared to have bounded derivatives of every order >= 1.
    """

    components: tuple
    name: str = "custom"
    order: float | None = None
    bounded: bool = False

    def __post_init__(self):
        comps = tuple(se.canonical_names(se.as_expr(c), len(self.components), "w")
                      for c in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("quantizing function needs at least one component")
        extra = set().union(*(se.free_vars(c) for c in comps)) - set(self.variables)
        if extra:
            raise ValueError(f"tau may only use {self.variables}, found {sorted(extra)}")
        at0 = self.evaluate(np.zeros((1, self.dim)))
        if np.max(np.abs(at0)) > _TOL_ZERO:
            raise ValueError(f"tau(0) = {at0[0].tolist()} is not zero")

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def variables(self) -> list[str]:
        return se.axis_names("w", self.dim)

    @cached_property
    def polynomial(self) -> tuple | None:
        """Exact polynomial form of each component, or ``None``."""
        polys = tuple(se.to_polynomial(c, self.variables) for c in self.components)
        return None if any(p is None for p in polys) else polys

    @property
    def is_polynomial(self) -> bool:
        return self.polynomial is not None

    @cached_property
    def degree(self) -> int | None:
        if self.polynomial is None:
            return None
        return max((sum(m) for p in self.polynomial for m in p), default=0)

    @cached_property
    def jacobian_exprs(self) -> tuple:
        return tuple(tuple(se.diff(c, v) for v in self.variables) for c in self.components)

    def derivative(self, i: int, alpha) -> SymbolExpr:
        return se.diff_multi(self.components[i], self.variables, alpha)

    def binding(self, w) -> dict:
        w = np.asarray(w, dtype=float)
        return {v: w[..., i] for i, v in enumerate(self.variables)}

    def evaluate(self, w) -> np.ndarray:
        """tau at points ``w`` of shape (..., n); returns the same shape."""
        w = np.asarray(w, dtype=float)
        b = self.binding(w)
        out = [np.broadcast_to(se.evaluate(c, b), w.shape[:-1]) for c in self.components]
        return np.stack(out, axis=-1)

    __call__ = evaluate

    def jacobian(self, w) -> np.ndarray:
        """Jacobian at points of shape (..., n); returns (..., n, n)."""
        w = np.asarray(w, dtype=float)
        b = self.binding(w)
        rows = [
            np.stack([np.broadcast_to(se.evaluate(d, b), w.shape[:-1]) for d in row], axis=-1)
            for row in self.jacobian_exprs
        ]
        return np.stack(rows, axis=-2)

    def substituted(self, args: list[SymbolExpr]) -> list[SymbolExpr]:
        """Components with ``w`` replaced by the expressions ``args``."""
        mapping = dict(zip(self.variables, args))
        return [se.substitute(c, mapping) for c in self.components]

    def text(self) -> list[str]:
        return [se.to_text(c) for c in self.components]


# ---------------------------------------------------------------------------
# Construction


def make_preset(name: str, dim: int, s: float | None = None) -> QuantizingFunction:
    """Preset quantizing functions.

    ``kn`` is tau = 0, ``akn`` the identity, ``weyl`` w/2 and ``linear`` s*w,
    each componentwise.  ``heisenberg:standard`` and ``heisenberg:polarised``
    (dimension 3) are the symmetry functions of the Heisenberg group pulled
    back through exponential coordinates.
    """
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    ws = [se.var(v) for v in se.axis_names("w", dim)]
    if name.startswith("linear:") and s is None:
        s = float(name.split(":", 1)[1])
        name = "linear"
    if name == "kn":
        comps = [se.const(0.0)] * dim
    elif name == "akn":
        comps = ws
    elif name == "weyl":
        comps = [se.div(w, se.const(2.0)) for w in ws]
    elif name == "linear":
        if s is None:
            raise ValueError("linear preset needs a parameter s")
        comps = [se.mul(se.const(s), w) for w in ws]
        name = f"linear:{s!r}"
    elif name.startswith("heisenberg:"):
        from .heisenberg import pullback_components

        if dim != 3:
            raise ValueError("Heisenberg pullbacks live in dimension 3")
        comps = [se.parse(t) for t in pullback_components(name.split(":", 1)[1])]
    else:
        raise ValueError(f"unknown preset {name!r}")
    return QuantizingFunction(tuple(comps), name=name, order=0.0, bounded=not name.startswith("heis"))


def from_spec(text: str, dim: int) -> QuantizingFunction:
    """Preset name or comma-separated component expressions in ``w`` variables."""
    t = text.strip()
    if t in ("kn", "akn", "weyl") or t.startswith("linear:") or t.startswith("heisenberg:"):
        return make_preset(t, dim)
    parts = [se.parse(p) for p in t.split(",")]
    if len(parts) != dim:
        raise ValueError(f"tau has {len(parts)} components, grid dimension is {dim}")
    return QuantizingFunction(tuple(parts))


def _dual_name(name: str) -> str:
    if name == "kn":
        return "akn"
    if name == "akn":
        return "kn"
    if name == "weyl":
        return "weyl"
    if name.startswith("linear:"):
        return f"linear:{1.0 - float(name.split(':', 1)[1])!r}"
    return "custom"


def dual(tau: QuantizingFunction) -> QuantizingFunction:
    """The dual quantizing function z + tau(-z), built symbolically."""
    zs = [se.var(v) for v in tau.variables]
    flipped = tau.substituted([se.neg(z) for z in zs])
    comps = tuple(se.add(z, c) for z, c in zip(zs, flipped))
    return QuantizingFunction(comps, name=_dual_name(tau.name), order=tau.order,
                              bounded=tau.bounded)


# ---------------------------------------------------------------------------
# Admissibility


@dataclass
class AdmissibilityReport:
    """Sampled admissibility data for a quantizing function.

    ``mu_hat`` is ``None`` when no exponent up to 4 fits the probe.
    """

    tau0_residual: float
    mu_hat: float | None
    bounded_derivatives: bool
    hadamard_ok: bool
    min_jacobian: float
    jacobian_sign_change: bool
    derivative_sups: dict = field(default_factory=dict)
    box_halfwidth: float = 5.0
    samples: int = 0


def _sobol(n: int, count: int, seed: int) -> np.ndarray:
    m = max(1, math.ceil(math.log2(count)))
    pts = qmc.Sobol(d=n, scramble=True, seed=seed).random_base2(m)
    return pts[:count]


def probe_points(n: int, halfwidth: float, samples: int, seed: int = 0) -> np.ndarray:
    """Quasi-random box samples plus the origin and axis lattices."""
    box = (2.0 * _sobol(n, samples, seed) - 1.0) * halfwidth
    line = np.linspace(-halfwidth, halfwidth, 41)
    axes = []
    for i in range(n):
        pts = np.zeros((line.size, n))
        pts[:, i] = line
        axes.append(pts)
    return np.vstack([np.zeros((1, n)), box, *axes])


def check_admissible(tau: QuantizingFunction, box_halfwidth: float = 5.0,
                     samples: int = 2000, seed: int = 0) -> AdmissibilityReport:
    """Probe the admissibility conditions of ``tau`` by sampling.

    Derivatives up to order 4 are sampled on ``[-h, h]^n``.  The order estimate
    is the smallest half-integer mu in [0, 4] such that every sampled
    ``|d^alpha tau_i(x)| <= C <x>^mu`` with C ten times the sup of the same
    derivative over the unit ball.  This is an estimate, not a certificate.
    """
    if samples < 100:
        raise ValueError("samples must be at least 100")
    n = tau.dim
    pts = probe_points(n, box_halfwidth, samples, seed)
    ball = (2.0 * _sobol(n, 512, seed + 1) - 1.0)
    ball = np.vstack([np.zeros((1, n)), ball[np.linalg.norm(ball, axis=1) <= 1.0]])
    radius = np.linalg.norm(pts, axis=1)
    bracket = np.sqrt(1.0 + radius**2)
    half = radius <= 0.5 * box_halfwidth * math.sqrt(n)

    tau0 = float(np.max(np.abs(tau.evaluate(np.zeros((1, n))))))
    mus = [0.5 * i for i in range(9)]
    mu_needed = 0.0
    bounded = True
    sups: dict = {}
    for order in range(1, 5):
        for alpha in multi_indices(n, order):
            for i in range(n):
                d = tau.derivative(i, alpha)
                vals = np.abs(np.broadcast_to(se.evaluate(d, tau.binding(pts)), radius.shape))
                ball_sup = float(np.max(np.abs(se.evaluate(d, tau.binding(ball)))))
                sups[f"{i}:{alpha}"] = float(np.max(vals))
                c = 10.0 * ball_sup
                fit = next((mu for mu in mus
                            if np.all(vals <= c * bracket**mu + _TOL_ZERO)), None)
                if fit is None:
                    mu_needed = None
                elif mu_needed is not None:
                    mu_needed = max(mu_needed, fit)
                if np.max(vals) > 1.5 * np.max(vals[half]) + _TOL_ZERO:
                    bounded = False
    if mu_needed != 0.0:
        bounded = False

    jac = tau.jacobian(pts)
    det = np.linalg.det(jac) if n > 1 else jac[:, 0, 0]
    min_jac = float(np.min(np.abs(det)))
    sign_change = bool(np.any(det > 0) and np.any(det < 0))
    norms = np.linalg.norm(tau.evaluate(pts), axis=1)
    inner = radius <= 0.3 * box_halfwidth
    outer = radius >= 0.9 * box_halfwidth
    proper = bool(np.min(norms[outer]) > np.max(norms[inner]))
    hadamard = min_jac > _TOL_ZERO and not sign_change and proper
    return AdmissibilityReport(
        tau0_residual=tau0,
        mu_hat=mu_needed,
        bounded_derivatives=bounded,
        hadamard_ok=hadamard,
        min_jacobian=min_jac,
        jacobian_sign_change=sign_change,
        derivative_sups=sups,
        box_halfwidth=box_halfwidth,
        samples=int(pts.shape[0]),
    )


# ---------------------------------------------------------------------------
# Taylor data


@dataclass
class TaylorData:
    """Taylor expansion of tau to order N with an exact remainder.

    ``tau_i(w) = sum_{1<=|g|<N} coefficients[g][i] w^g
               + sum_{|g|=N} remainder[g][i](w) w^g``
    """

    order: int
    dim: int
    coefficients: dict
    remainder: dict
    exact: bool

    def evaluate(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        names = se.axis_names("w", self.dim)
        b = {v: w[..., i] for i, v in enumerate(names)}
        out = np.zeros(w.shape)
        for g, coeffs in self.coefficients.items():
            mono = np.prod([w[..., i] ** g[i] for i in range(self.dim)], axis=0)
            for i, c in enumerate(coeffs):
                out[..., i] += float(c) * mono
        for g, exprs in self.remainder.items():
            mono = np.prod([w[..., i] ** g[i] for i in range(self.dim)], axis=0)
            for i, e in enumerate(exprs):
                out[..., i] += se.evaluate(e, b) * mono
        return out


def _split_exponent(eps, order: int):
    """Deterministic gamma <= eps with |gamma| = order."""
    gamma, left = [], order
    for e in eps:
        take = min(e, left)
        gamma.append(take)
        left -= take
    return tuple(gamma)


def taylor(tau: QuantizingFunction, N: int) -> TaylorData:
    """Taylor coefficients ``c_g`` for ``1 <= |g| < N`` and remainder terms.

    Polynomial tau yields exact rationals and exact polynomial remainders.
    Otherwise the coefficients are derivatives at 0 over ``g!`` and the
    remainder coefficients are ``(N/g!) int_0^1 (1-t)^(N-1) d^g tau(t w) dt``,
    integrated by fixed Gauss-Legendre quadrature.
    """
    if N < 1:
        raise ValueError("Taylor order must be at least 1")
    n = tau.dim
    names = tau.variables
    zero = (0,) * n
    if tau.polynomial is not None:
        coeffs: dict = {}
        rem: dict = {}
        for i, p in enumerate(tau.polynomial):
            for eps, c in p.items():
                if sum(eps) < N:
                    coeffs.setdefault(eps, [Fraction(0)] * n)[i] += c
                else:
                    g = _split_exponent(eps, N)
                    slot = rem.setdefault(g, [{} for _ in range(n)])
                    rest = tuple(e - h for e, h in zip(eps, g))
                    slot[i] = se.poly_add(slot[i], {rest: c})
        coeffs.pop(zero, None)
        remainder = {g: tuple(se.from_polynomial(p, names) for p in polys)
                     for g, polys in rem.items()}
        return TaylorData(N, n, {g: tuple(c) for g, c in coeffs.items()}, remainder, True)

    origin = {v: 0.0 for v in names}
    coeffs = {}
    for order in range(1, N):
        for g in multi_indices(n, order):
            vals = tuple(se.evaluate(tau.derivative(i, g), origin) / multi_factorial(g)
                         for i in range(n))
            coeffs[g] = vals
    t, wts = np.polynomial.legendre.leggauss(GAUSS_NODES)
    t, wts = 0.5 * (t + 1.0), 0.5 * wts
    ws = [se.var(v) for v in names]
    remainder = {}
    for g in multi_indices(n, N):
        scale = N / multi_factorial(g)
        comps = []
        for i in range(n):
            d = tau.derivative(i, g)
            acc = se.const(0.0)
            for tk, wk in zip(t, wts):
                scaled = se.substitute(d, {v: se.mul(se.const(tk), w) for v, w in zip(names, ws)})
                acc = se.add(acc, se.mul(se.const(scale * wk * (1.0 - tk) ** (N - 1)), scaled))
            comps.append(acc)
        remainder[g] = tuple(comps)
    return TaylorData(N, n, coeffs, remainder, False)


# ---------------------------------------------------------------------------
# Inversion of tau_x


def invert_tau_x_batch(tau: QuantizingFunction, x, w, tol: float = 1e-12,
                       max_iter: int = 100) -> np.ndarray:
    """Solve ``x + tau(y - x) = w`` for y at many points by damped Newton.

    Parameters
    ----------
    x, w : array_like, shape (P, n)
        Base points and targets.

    Raises
    ------
    NewtonError
        Singular Jacobian or no convergence within ``max_iter`` iterations.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    w = np.atleast_2d(np.asarray(w, dtype=float))
    x, w = np.broadcast_arrays(x, w)
    target = w - x
    z = target.copy()

    def residual(zz, tt):
        return tau.evaluate(zz) - tt

    r = residual(z, target)
    rn = np.linalg.norm(r, axis=1)
    active = rn > tol
    for _ in range(max_iter):
        if not np.any(active):
            return x + _polish(tau, z, r, target)
        idx = np.flatnonzero(active)
        jac = tau.jacobian(z[idx])
        det = np.linalg.det(jac)
        if np.any(np.abs(det) < 1e-14):
            raise NewtonError("singular Jacobian in tau_x inversion")
        step = np.linalg.solve(jac, r[idx][..., None])[..., 0]
        lam = np.ones(idx.size)
        pending = np.ones(idx.size, dtype=bool)
        znew = z[idx].copy()
        rnew = r[idx].copy()
        while np.any(pending):
            p = np.flatnonzero(pending)
            trial = z[idx[p]] - lam[p, None] * step[p]
            rt = residual(trial, target[idx[p]])
            better = np.linalg.norm(rt, axis=1) < rn[idx[p]]
            done = better | (lam[p] <= 2.0**-20)
            znew[p[done]] = trial[done]
            rnew[p[done]] = rt[done]
            pending[p[done]] = False
            lam[p[~done]] *= 0.5
        z[idx] = znew
        r[idx] = rnew
        rn[idx] = np.linalg.norm(rnew, axis=1)
        active = rn > tol
    if np.any(active):
        raise NewtonError(f"tau_x inversion did not converge in {max_iter} iterations")
    return x + _polish(tau, z, r, target)


def _polish(tau: QuantizingFunction, z, r, target) -> np.ndarray:
    """One extra Newton step, kept only where it lowers the residual."""
    jac = tau.jacobian(z)
    if np.any(np.abs(np.linalg.det(jac)) < 1e-14):
        return z
    trial = z - np.linalg.solve(jac, r[..., None])[..., 0]
    rt = tau.evaluate(trial) - target
    keep = np.linalg.norm(rt, axis=1) < np.linalg.norm(r, axis=1)
    return np.where(keep[:, None], trial, z)


def invert_tau_x(tau: QuantizingFunction, x, w, tol: float = 1e-12) -> np.ndarray:
    """Return y with ``|x + tau(y - x) - w| <= tol``; ``y = x`` when ``w = x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    w = np.asarray(w, dtype=float).reshape(-1)
    if np.array_equal(x, w):
        return x.copy()
    return invert_tau_x_batch(tau, x[None, :], w[None, :], tol)[0]
