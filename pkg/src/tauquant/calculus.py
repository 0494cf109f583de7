"""
Symbolic calculus for tau-quantized operators.

An amplitude a(x, y, xi) is expanded around ``v = x + tau(y - x)``.  The term
of index (alpha, beta) has the pre-integration-by-parts amplitude

    (1 / alpha! beta!) [d_x^alpha d_y^beta a](v, v, xi) (x - v)^alpha (y - v)^beta,

and with ``w = x - y`` the polynomial factor is
``P(w) = (-1)^|beta| t(w)^alpha (w - t(w))^beta`` where ``t(w) = -tau(-w)``.
Integrating by parts turns each monomial ``w^delta`` into
``i^|delta| d_xi^delta``, which yields a genuine tau-symbol whenever the
polynomial factor is known exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import symexpr as se
from .discretize import Grid, GridFunction, central_probes, dft
from .estimates import ellipticity, frequency_basis
from .quantize import (ComplexSymbol, OperatorMatrix, amplitude_vars, op_amplitude,
                       op_symbol, symbol_vars)
from .tau import (QuantizingFunction, check_admissible, dual, invert_tau_x_batch,
                  make_preset, multi_factorial, multi_indices, taylor)

__all__ = [
    "ExpansionTerm",
    "ExpansionResult",
    "EllipticityError",
    "PreconditionError",
    "index_pairs",
    "reduce_amplitude",
    "factor_expansion",
    "amplitude_to_symbol_terms",
    "symbol_amplitude",
    "convert_quantization",
    "dual_quantization",
    "compose_expansion",
    "parametrix",
    "cutoff",
    "parametrix_residual",
    "leading_symbol",
    "changevar_leading",
]


class EllipticityError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def index_pairs(n: int, M: int) -> list[tuple[tuple, tuple]]:
    """All (alpha, beta) with |alpha| + |beta| < M, ordered by (|alpha|+|beta|, alpha, beta)."""
    pairs = []
    for total in range(M):
        for ka in range(total + 1):
            for alpha in multi_indices(n, ka):
                for beta in multi_indices(n, total - ka):
                    pairs.append((alpha, beta))
    return sorted(pairs, key=lambda p: (sum(p[0]) + sum(p[1]), p[0], p[1]))


def _times_i_power(s: ComplexSymbol, p: int) -> ComplexSymbol:
    p %= 4
    if p == 0:
        return s
    if p == 1:
        return ComplexSymbol(se.neg(s.im), s.re)
    if p == 2:
        return -s
    return ComplexSymbol(s.im, se.neg(s.re))


def _zero() -> ComplexSymbol:
    return ComplexSymbol(se.const(0.0), se.const(0.0))


def _check(s: ComplexSymbol) -> ComplexSymbol:
    se.check_growth(s.re)
    se.check_growth(s.im)
    return s


# ---------------------------------------------------------------------------
# Polynomial factors


def _reflected(tau: QuantizingFunction, polys=None) -> list[dict]:
    """Exact polynomials of t(w) = -tau(-w)."""
    polys = tau.polynomial if polys is None else polys
    out = []
    for p in polys:
        out.append({e: c * (-1) ** (sum(e) + 1) for e, c in p.items()})
    return out


def _product_poly(tpolys: list[dict], alpha, beta) -> dict:
    """t(w)^alpha (w - t(w))^beta as an exact polynomial."""
    n = len(tpolys)
    out = se.poly_const(1, n)
    for i in range(n):
        out = se.poly_mul(out, se.poly_pow(tpolys[i], alpha[i], n))
        comp = se.poly_add(se.poly_monomial(i, n), se.poly_scale(tpolys[i], Fraction(-1)))
        out = se.poly_mul(out, se.poly_pow(comp, beta[i], n))
    return out


def factor_expansion(tau: QuantizingFunction, alpha, beta, N: int = 1) -> list[tuple]:
    """Group ``tau(w)^alpha (w - tau(w))^beta`` as ``sum_delta E_delta(w) w^delta``.

    Monomials of degree up to ``D = N(|alpha|+|beta|)`` are their own delta with
    a constant coefficient; higher monomials are assigned to a delta with
    ``|delta| = D`` and contribute a polynomial coefficient.  Coefficients are
    exact rationals.

    Returns
    -------
    list of (delta, E_delta)
        ``E_delta`` is a dict mapping exponent tuples to Fractions.
    """
    if tau.polynomial is None:
        raise ValueError("factor expansion needs a polynomial tau")
    return _factor_groups(list(tau.polynomial), alpha, beta, N)


def _factor_groups(polys: list[dict], alpha, beta, N: int) -> list[tuple]:
    if sum(alpha) + sum(beta) > 8:
        raise ValueError("|alpha| + |beta| must not exceed 8")
    n = len(polys)
    prod = _product_poly(polys, alpha, beta)
    D = N * (sum(alpha) + sum(beta))
    groups: dict = {}
    for eps, c in sorted(prod.items()):
        if sum(eps) <= D:
            delta, rest = eps, (0,) * n
        else:
            delta = _split(eps, D)
            rest = tuple(e - d for e, d in zip(eps, delta))
        groups[delta] = se.poly_add(groups.get(delta, {}), {rest: c})
    return sorted((d, e) for d, e in groups.items() if e)


def _split(eps, total: int) -> tuple:
    out, left = [], total
    for e in eps:
        take = min(e, left)
        out.append(take)
        left -= take
    return tuple(out)


# ---------------------------------------------------------------------------
# Expansion terms


@dataclass
class ExpansionTerm:
    """One (alpha, beta) term of an amplitude expansion.

    Attributes
    ----------
    amplitude : ComplexSymbol
        Pre-integration-by-parts amplitude in (x, y, k).
    derivative : ComplexSymbol
        ``d_x^alpha d_y^beta a`` in (x, y, k), before evaluation at (v, v).
    factor : dict or None
        Exact polynomial ``P(w)/(alpha! beta!)`` in ``w = x - y``; truncated
        below the expansion order when ``exact`` is False.
    closed_form : list or None
        ``(delta, k_delta)`` pairs with ``k_delta = i^|delta| E_delta`` stored as
        ``(delta, E_delta, |delta| mod 4)``; present for polynomial tau.
    """

    alpha: tuple
    beta: tuple
    amplitude: ComplexSymbol
    derivative: ComplexSymbol
    factor: dict | None
    exact: bool
    closed_form: list | None = None

    def symbol(self, n: int) -> ComplexSymbol:
        """The term as a tau-symbol in (x, k), via ``w^delta -> i^|delta| d_xi^delta``."""
        if self.factor is None:
            raise ValueError("term has no polynomial factor")
        xs, ys, ks = amplitude_vars(n)
        diag = {y: se.var(x) for x, y in zip(xs, ys)}
        base = self.derivative.substitute(diag)
        out = _zero()
        for eps, c in sorted(self.factor.items()):
            d = base.diff_multi(ks, eps)
            if d.is_zero():
                continue
            out = out + _times_i_power(d.times_real(se.const(float(c))), sum(eps))
        return _check(out)

    def closed_amplitude(self, n: int) -> ComplexSymbol:
        """Amplitude ``sum_delta k_delta(x - y) [d_xi^delta D](v, v, xi)``."""
        if self.closed_form is None:
            raise ValueError("term has no closed form")
        xs, ys, ks = amplitude_vars(n)
        ws = se.axis_names("w", n)
        wsub = {w: se.sub(se.var(x), se.var(y)) for w, x, y in zip(ws, xs, ys)}
        vmap = self._vmap
        out = _zero()
        for delta, E, ipow in self.closed_form:
            coeff = se.substitute(se.from_polynomial(E, ws), wsub)
            d = self.derivative.diff_multi(ks, delta).substitute(vmap)
            out = out + _times_i_power(d.times_real(coeff), ipow)
        return _check(out)

    _vmap: dict = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        re, im = self.amplitude.text()
        out = {"alpha": list(self.alpha), "beta": list(self.beta),
               "amplitude_re": re, "amplitude_im": im}
        if self.closed_form is not None:
            n = len(self.alpha)
            ws = se.axis_names("w", n)
            out["closed_form"] = [
                {"delta": list(d), "coefficient": se.to_text(se.from_polynomial(E, ws)),
                 "i_power": p}
                for d, E, p in self.closed_form
            ]
        return out


@dataclass
class ExpansionResult:
    """Ordered expansion terms below order M plus remainder metadata."""

    target: QuantizingFunction
    M: int
    N: int
    terms: list
    remainder: dict

    @property
    def dim(self) -> int:
        return self.target.dim

    @property
    def exact(self) -> bool:
        return all(t.exact for t in self.terms)

    def symbol(self, asymptotic: bool = False) -> ComplexSymbol:
        """Sum of the term symbols, a tau-symbol for the target quantization.

        For a non-polynomial target the polynomial factors are Taylor
        truncations; pass ``asymptotic=True`` to accept that.
        """
        if not self.exact and not asymptotic:
            raise ValueError("target tau is not polynomial; pass asymptotic=True")
        out = _zero()
        for t in self.terms:
            out = out + t.symbol(self.dim)
        return _check(out)

    def amplitude(self, form: str = "pre_ibp") -> ComplexSymbol:
        out = _zero()
        for t in self.terms:
            out = out + (t.amplitude if form == "pre_ibp" else t.closed_amplitude(self.dim))
        return _check(out)

    def operator(self, grid: Grid, form: str = "symbol", workers: int | None = None) -> OperatorMatrix:
        """Assemble the truncated expansion on ``grid``.

        ``form`` is ``symbol`` (closed tau-symbol, polynomial targets),
        ``closed`` (closed amplitudes) or ``pre_ibp``.
        """
        if form == "symbol":
            return op_symbol(self.symbol(), self.target, grid, workers)
        return op_amplitude(self.amplitude(form), grid, workers)

    def to_json(self) -> dict:
        name = self.target.name if self.target.name != "custom" else self.target.text()
        return {"target_tau": name, "M": self.M, "N": self.N,
                "terms": [t.to_json() for t in self.terms], "remainder": self.remainder}


def amplitude_to_symbol_terms(a: ComplexSymbol, tau: QuantizingFunction, M: int, N: int = 1,
                              m: float | None = None, d: float = 0.0) -> ExpansionResult:
    """Expand an amplitude into terms for the quantization ``tau``.

    Parameters
    ----------
    a : ComplexSymbol
        Amplitude in (x, y, k).
    tau : QuantizingFunction
        Target quantizing function.
    M : int
        Number of orders kept: all (alpha, beta) with |alpha|+|beta| < M.
    N : int
        Taylor depth of the closed (delta, k_delta) forms.
    m, d : float
        Symbol order and spatial growth of ``a``; only recorded in the
        remainder descriptor.
    """
    if M < 1 or N < 1:
        raise ValueError("M and N must be at least 1")
    n = tau.dim
    a = a.canonical(n)
    xs, ys, ks = amplitude_vars(n)
    X = [se.var(x) for x in xs]
    Y = [se.var(y) for y in ys]
    shift = tau.substituted([se.sub(y, x) for x, y in zip(X, Y)])
    v = [se.add(x, s) for x, s in zip(X, shift)]
    x_minus_v = [se.neg(s) for s in shift]
    y_minus_v = [se.sub(se.sub(y, x), s) for x, y, s in zip(X, Y, shift)]
    vmap = {name: e for name, e in zip(xs, v)}
    vmap.update({name: e for name, e in zip(ys, v)})

    if tau.polynomial is not None:
        tpolys, exact = _reflected(tau), True
    else:
        td = taylor(tau, max(M, 2))
        approx = [{} for _ in range(n)]
        for g, cs in td.coefficients.items():
            for i, c in enumerate(cs):
                approx[i] = se.poly_add(approx[i], {g: Fraction(repr(float(c)))})
        tpolys, exact = _reflected(tau, approx), False

    terms = []
    for alpha, beta in index_pairs(n, M):
        D = a.diff_multi(xs, alpha).diff_multi(ys, beta)
        scale = multi_factorial(alpha) * multi_factorial(beta)
        poly_factor = se.const(1.0 / scale)
        for i in range(n):
            poly_factor = se.mul(poly_factor, se.power(x_minus_v[i], alpha[i]))
            poly_factor = se.mul(poly_factor, se.power(y_minus_v[i], beta[i]))
        amp = _check(D.substitute(vmap).times_real(poly_factor))
        sign = (-1) ** sum(beta)
        prod = _product_poly(tpolys, alpha, beta)
        if not exact:
            prod = {e: c for e, c in prod.items() if sum(e) < M}
        factor = {e: sign * c / scale for e, c in prod.items()}
        closed = None
        if exact:
            closed = [(delta, {e: sign * c / scale for e, c in E.items()}, sum(delta) % 4)
                      for delta, E in _factor_groups(tpolys, alpha, beta, N)]
        terms.append(ExpansionTerm(alpha, beta, amp, D, factor, exact, closed, vmap))
    mu = tau.order or 0.0
    remainder = {"order": (m - M) if m is not None else f"m-{M}",
                 "order_drop": M, "growth": (mu + d) * M}
    return ExpansionResult(tau, M, N, terms, remainder)


def symbol_amplitude(sigma: ComplexSymbol, tau: QuantizingFunction) -> ComplexSymbol:
    """The amplitude ``sigma(x + tau(y - x), k)``."""
    n = tau.dim
    xs, ys, _ = amplitude_vars(n)
    sigma = sigma.canonical(n)
    shift = tau.substituted([se.sub(se.var(y), se.var(x)) for x, y in zip(xs, ys)])
    return sigma.substitute({x: se.add(se.var(x), s) for x, s in zip(xs, shift)})


def convert_quantization(sigma: ComplexSymbol, tau1: QuantizingFunction,
                         tau2: QuantizingFunction, M: int, N: int = 1,
                         m: float | None = None) -> ExpansionResult:
    """Rewrite the tau1-operator of ``sigma`` as a tau2-operator, to order M."""
    if tau1.dim != tau2.dim:
        raise ValueError("quantizing functions of different dimensions")
    return amplitude_to_symbol_terms(symbol_amplitude(sigma, tau1), tau2, M, N, m,
                                     d=tau1.order or 0.0)


def _negate_k(sigma: ComplexSymbol, n: int) -> ComplexSymbol:
    _, ks = symbol_vars(n)
    return sigma.substitute({k: se.neg(se.var(k)) for k in ks})


def dual_quantization(sigma: ComplexSymbol, tau: QuantizingFunction,
                      kind: str = "adjoint") -> tuple[ComplexSymbol, QuantizingFunction]:
    """Symbol and quantizing function of the transpose or adjoint operator."""
    sigma = sigma.canonical(tau.dim)
    if kind == "transpose":
        return _negate_k(sigma, tau.dim), dual(tau)
    if kind == "adjoint":
        return sigma.conj(), dual(tau)
    raise ValueError(f"unknown kind {kind!r}")


def compose_expansion(sigma1: ComplexSymbol, tau1: QuantizingFunction, sigma2: ComplexSymbol,
                      tau2: QuantizingFunction, tau3: QuantizingFunction, M: int,
                      N: int = 1) -> ExpansionResult:
    """Expansion of the product ``A1 A2`` as a tau3-operator.

    ``A1`` is rewritten with a Kohn-Nirenberg symbol s1(x, xi) and ``A2`` with
    an anti-Kohn-Nirenberg symbol s2(y, xi); the product is then the amplitude
    operator of ``s1(x, xi) s2(y, xi)``, which is expanded for ``tau3``.
    """
    n = tau3.dim
    kn, akn = make_preset("kn", n), make_preset("akn", n)
    s1 = sigma1.canonical(n) if tau1.name == "kn" else \
        convert_quantization(sigma1, tau1, kn, M).symbol(asymptotic=True)
    s2 = sigma2.canonical(n) if tau2.name == "akn" else \
        convert_quantization(sigma2, tau2, akn, M).symbol(asymptotic=True)
    xs, ys, _ = amplitude_vars(n)
    s2y = s2.substitute({x: se.var(y) for x, y in zip(xs, ys)})
    return amplitude_to_symbol_terms(s1 * s2y, tau3, M, N)


# ---------------------------------------------------------------------------
# Parametrix


def cutoff(R0: float, n: int) -> se.SymbolExpr:
    """Smooth cutoff: 0 for |xi| <= R0, 1 for |xi| >= 2 R0.

    The ramp runs in ``|xi|^2``, which keeps the cutoff a smooth expression.
    """
    if R0 <= 0:
        return se.const(1.0)
    _, ks = symbol_vars(n)
    r2 = se.const(0.0)
    for k in ks:
        r2 = se.add(r2, se.power(se.var(k), 2))
    t = se.div(se.sub(r2, se.const(R0 * R0)), se.const(3.0 * R0 * R0))
    return se.call("ramp", t)


def parametrix(sigma: ComplexSymbol, tau: QuantizingFunction, m: float, M: int,
               R0: float = 0.0, box=(math.pi, 16.0),
               conversion_order: int | None = None) -> ComplexSymbol:
    """Approximate inverse symbol kappa (a tau-symbol) with ``M`` recursion terms.

    The tau-symbol is rewritten as a Kohn-Nirenberg symbol s, the recursion

        kappa_0 = chi / s,
        kappa_j = -kappa_0 sum_{k<j, |alpha|=j-k} (1/alpha!) d_xi^alpha kappa_k D_x^alpha s

    with ``D = -i d`` is summed for ``j < M``, and the result is rewritten for tau.

    Raises
    ------
    EllipticityError
        If the sampled ellipticity constant vanishes, or ``|s|`` drops below
        1e-12 where the cutoff is active.
    """
    n = tau.dim
    sigma = sigma.canonical(n)
    if ellipticity(sigma, m, R0, box, n) is None:
        raise EllipticityError("symbol is not elliptic on the sampled region")
    kn = make_preset("kn", n)
    Mc = M + 1 if conversion_order is None else conversion_order
    s = sigma if tau.name == "kn" else convert_quantization(sigma, tau, kn, Mc).symbol(asymptotic=True)
    xs, ks = symbol_vars(n)
    _check_nonvanishing(s, R0, box, n)
    chi = cutoff(R0, n)
    inv_s = s.reciprocal()
    kappa0 = inv_s.times_real(chi)
    kappas = [kappa0]
    dx_cache: dict = {}
    for j in range(1, M):
        acc = _zero()
        for k in range(j):
            for alpha in multi_indices(n, j - k):
                if alpha not in dx_cache:
                    dx_cache[alpha] = _times_i_power(s.diff_multi(xs, alpha), 3 * sum(alpha))
                dxs = dx_cache[alpha]
                if dxs.is_zero():
                    continue
                term = kappas[k].diff_multi(ks, alpha) * dxs
                acc = acc + term.scale(1.0 / multi_factorial(alpha))
        kappas.append(_check(-(kappa0 * acc)))
    kappa = _zero()
    for kj in kappas:
        kappa = kappa + kj
    if tau.name == "kn":
        return _check(kappa)
    return convert_quantization(kappa, kn, tau, Mc).symbol(asymptotic=True)


def parametrix_residual(product: np.ndarray, grid: Grid, R0: float) -> float:
    """Spectral norm of ``P (K A - I) P`` with ``P`` the projection onto modes
    ``2 R0 <= |xi| <= band/2``.

    The cutoff transition region ``R0 < |xi| < 2 R0`` and the outer half of
    the band are excluded on both sides.
    """
    F = frequency_basis(grid)
    r = np.linalg.norm(grid.freqs, axis=1)
    sel = (r >= 2.0 * R0) & (r <= grid.band / 2.0)
    Fs = F[:, sel]
    R = product - np.eye(grid.size)
    return float(np.linalg.norm(Fs.conj().T @ R @ Fs, 2))


def _check_nonvanishing(s: ComplexSymbol, R0: float, box, n: int) -> None:
    xs, ks = symbol_vars(n)
    hx, hk = box
    lin_x = np.linspace(-hx, hx, 33)
    lin_k = np.linspace(-hk, hk, 129)
    if n == 1:
        X, K = np.meshgrid(lin_x, lin_k, indexing="ij")
        pts = {xs[0]: X.ravel(), ks[0]: K.ravel()}
        r = np.abs(K.ravel())
    else:
        g = np.array(np.meshgrid(*([lin_x[::4]] * n + [lin_k[::8]] * n), indexing="ij"))
        g = g.reshape(2 * n, -1)
        pts = {v: g[i] for i, v in enumerate(xs + ks)}
        r = np.linalg.norm(g[n:], axis=0)
    vals = np.abs(np.broadcast_to(s.evaluate(pts), r.shape))
    if np.any(vals[r >= R0] < 1e-12):
        raise EllipticityError("symbol nearly vanishes where the cutoff is active")


# ---------------------------------------------------------------------------
# Change of variables


def _trig_interpolate(grid: Grid, u: GridFunction, pts: np.ndarray) -> np.ndarray:
    """Evaluate the band-limited interpolant of ``u`` at arbitrary points (P, n)."""
    uh = dft(u).values
    scale = (grid.dxi / (2.0 * math.pi)) ** grid.n
    out = np.empty(pts.shape[0], dtype=complex)
    step = max(1, (1 << 20) // grid.size)
    for s in range(0, pts.shape[0], step):
        blk = pts[s:s + step]
        out[s:s + step] = scale * (np.exp(1j * blk @ grid.freqs.T) @ uh)
    return out


def leading_symbol(sigma: ComplexSymbol, tau: QuantizingFunction) -> ComplexSymbol:
    """``b0(x, xi) = sigma(x, J^T xi)`` with ``J = d tau(0)``.

    The transition matrix at the diagonal is ``J^-1``; its determinant cancels
    against the Jacobian of ``tau_x^-1``, and the frequency is pulled back by
    the inverse transpose of ``J^-1``.
    """
    n = tau.dim
    sigma = sigma.canonical(n)
    J = tau.jacobian(np.zeros((1, n)))[0]
    _, ks = symbol_vars(n)
    new_k = []
    for i in range(n):
        acc = se.const(0.0)
        for j in range(n):
            if J[j, i] != 0.0:
                acc = se.add(acc, se.mul(se.const(float(J[j, i])), se.var(ks[j])))
        new_k.append(acc)
    return sigma.substitute(dict(zip(ks, new_k)))


def changevar_leading(sigma: ComplexSymbol, tau: QuantizingFunction, grid: Grid,
                      probes: np.ndarray | None = None) -> tuple[ComplexSymbol, dict]:
    """Leading symbol after the change of variables ``w = tau_x(y) = x + tau(y - x)``.

    The report compares ``A_{sigma,tau} u`` with the leading-order composed
    operator

        v(x_j) = sum_l K[j, l] u(tau_{x_j}^-1(x_j + m(y_l - x_j))),

    where ``K`` is the matrix of ``b0`` quantized in the integration variable
    (anti-Kohn-Nirenberg), on central band-interior probes.  For linear tau the
    two operators agree up to interpolation error.

    Raises
    ------
    PreconditionError
        If tau fails the bounded-derivative or global-inverse probe.
    """
    n = tau.dim
    probe = check_admissible(tau)
    if not (probe.bounded_derivatives and probe.hadamard_ok):
        raise PreconditionError("tau needs bounded derivatives and a global inverse")
    J = tau.jacobian(np.zeros((1, n)))[0]
    b0 = leading_symbol(sigma, tau)

    A = op_symbol(sigma.canonical(n), tau, grid).matrix
    K = op_symbol(b0, make_preset("akn", n), grid).matrix
    P = grid.size
    X = grid.points
    half = grid.N // 2
    idx = grid.index
    if probes is None:
        probes = central_probes(grid)
    window = np.all(np.abs(X) <= grid.L / 4.0, axis=1)
    Bu = np.zeros((P, probes.shape[1]), dtype=complex)
    for j in range(P):
        off = (np.mod(idx - idx[j] + half, grid.N) - half) * grid.dx
        W = X[j] + off
        Y = invert_tau_x_batch(tau, np.broadcast_to(X[j], W.shape), W)
        vals = np.stack([_trig_interpolate(grid, GridFunction(grid, probes[:, c]), Y)
                         for c in range(probes.shape[1])], axis=1)
        Bu[j] = K[j] @ vals
    Au = A @ probes
    num = np.linalg.norm((Au - Bu)[window], axis=0)
    den = np.maximum(np.linalg.norm(Au[window], axis=0), 1e-300)
    det_inv = abs(float(np.linalg.det(np.linalg.inv(J))))
    report = {
        "jacobian_at_zero": J.tolist(),
        "det_inverse_jacobian": det_inv,
        "det_transition_inverse": 1.0 / det_inv,
        "leading_symbol_re": se.to_text(b0.re),
        "leading_symbol_im": se.to_text(b0.im),
        "relative_mismatch": float(np.max(num / den)),
        "min_jacobian": probe.min_jacobian,
    }
    return b0, report


def reduce_amplitude(a: ComplexSymbol, Nred: int, n: int = 1) -> ComplexSymbol:
    """``(1 - Delta_xi)^Nred a / (1 + |x - y|^2)^Nred``, built symbolically.

    The operator with this amplitude equals the one with ``a``, since
    ``(1 - Delta_xi)`` applied to the phase ``exp(i (x - y) xi)`` gives the
    factor ``1 + |x - y|^2``.
    """
    if Nred < 1:
        raise ValueError("Nred must be at least 1")
    xs, ys, ks = amplitude_vars(n)
    b = a.canonical(n)
    for _ in range(Nred):
        lap = _zero()
        for k in ks:
            lap = lap + b.diff(k).diff(k)
        b = _check(b - lap)
    r2 = se.const(1.0)
    for x, y in zip(xs, ys):
        r2 = se.add(r2, se.power(se.sub(se.var(x), se.var(y)), 2))
    return _check(b.times_real(se.div(se.const(1.0), se.power(r2, Nred))))
