"""
Operator norms, derivative-sup bounds, ellipticity probes and Garding fits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import qmc

from . import symexpr as se
from .discretize import Grid, central_probes
from .quantize import ComplexSymbol, OperatorMatrix, amplitude_vars, op_symbol, symbol_vars
from .tau import QuantizingFunction, multi_indices

__all__ = [
    "NormReport",
    "CVReport",
    "GardingReport",
    "NonConvergenceError",
    "operator_norm",
    "cv_bound",
    "ellipticity",
    "garding_check",
    "operator_defect",
    "probe_defect",
    "frequency_basis",
]


class NonConvergenceError(RuntimeError):
    pass


@dataclass
class NormReport:
    norm: float
    method: str
    iterations: int
    residual: float

    def to_json(self) -> dict:
        return {"norm": asdict(self)}


def operator_norm(A, method: str = "power-iteration", tol: float = 1e-12,
                  max_iter: int = 200000, seed: int = 0) -> NormReport:
    """Largest singular value of a square matrix.

    ``power-iteration`` iterates on ``A^H A`` until the relative eigen-residual
    ``|A^H A v - lambda v| / lambda`` drops below ``tol``;
    ``full-decomposition`` uses a dense SVD.
    """
    M = A.matrix if isinstance(A, OperatorMatrix) else np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("operator_norm needs a square matrix")
    if method == "full-decomposition":
        s = np.linalg.svd(M, compute_uv=False)
        return NormReport(float(s[0]) if s.size else 0.0, method, 1, 0.0)
    if method != "power-iteration":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(seed)
    v = rng.normal(size=M.shape[0]) + 1j * rng.normal(size=M.shape[0])
    v /= np.linalg.norm(v)
    lam, res = 0.0, np.inf
    for it in range(1, max_iter + 1):
        w = M.conj().T @ (M @ v)
        lam = float(np.real(np.vdot(v, w)))
        if lam <= 0.0 or not np.any(w):
            return NormReport(0.0, method, it, 0.0)
        res = float(np.linalg.norm(w - lam * v) / lam)
        if res <= tol:
            return NormReport(math.sqrt(lam), method, it, res)
        v = w / np.linalg.norm(w)
    raise NonConvergenceError(f"power iteration stalled at residual {res:.3e}")


def operator_defect(A, B) -> float:
    """Spectral norm of the difference of two operators."""
    a = A.matrix if isinstance(A, OperatorMatrix) else A
    b = B.matrix if isinstance(B, OperatorMatrix) else B
    return float(np.linalg.norm(a - b, 2))


def probe_defect(A, B, grid: Grid) -> float:
    """Largest relative mismatch of ``A - B`` on central band-interior probes.

    Outputs are restricted to ``|x| <= L/4``, which keeps the measure free of
    periodization effects for operators with local kernels.
    """
    a = A.matrix if isinstance(A, OperatorMatrix) else A
    b = B.matrix if isinstance(B, OperatorMatrix) else B
    P = central_probes(grid)
    window = np.all(np.abs(grid.points) <= grid.L / 4.0, axis=1)
    diff = ((a - b) @ P)[window]
    return float(np.max(np.linalg.norm(diff, axis=0) / np.linalg.norm(P, axis=0)))


# ---------------------------------------------------------------------------
# Calderon-Vaillancourt derivative bound


@dataclass
class CVReport:
    """Sampled sups of amplitude derivatives.

    ``table`` maps ``"alpha|beta|gamma"`` keys to the sampled sup.
    """

    M_val: float
    table: dict
    box: list
    samples: int
    tau_sups: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"cv": asdict(self)}


def _cv_points(n: int, box, samples: int, seed: int) -> np.ndarray:
    """Scrambled Sobol points plus a tensor lattice that hits quarter points."""
    lo = np.array([-b for b in box], dtype=float)
    hi = np.array(box, dtype=float)
    d = 3 * n
    m = max(1, math.ceil(math.log2(samples)))
    sob = qmc.Sobol(d=d, scramble=True, seed=seed).random_base2(m)[:samples]
    per_axis = 4 * max(1, int(round(samples ** (1.0 / d) / 4))) + 1
    grid1 = np.linspace(0.0, 1.0, per_axis)
    lattice = np.array(list(itertools.product(grid1, repeat=d)))
    unit = np.vstack([sob, lattice])
    return lo + unit * (hi - lo)


def cv_bound(a: ComplexSymbol | None = None, n: int = 1, box=None, samples: int = 4096,
             sigma: ComplexSymbol | None = None, tau: QuantizingFunction | None = None,
             seed: int = 0) -> CVReport:
    """Sup of ``|d_x^alpha d_y^beta d_xi^gamma a|`` over ``|alpha|,|beta|,|gamma| <= 2n+1``.

    Parameters
    ----------
    a : ComplexSymbol, optional
        Amplitude in (x, y, k).  Alternatively pass ``sigma`` and ``tau``; the
        amplitude is then ``sigma(x + tau(y - x), k)`` and the sups of the
        derivatives of ``tau`` up to order ``4n+2`` are reported as well.
    box : sequence of 3 floats
        Half-widths for the x, y and k groups.
    """
    if box is None:
        box = (math.pi, math.pi, 8.0)
    xs, ys, ks = amplitude_vars(n)
    tau_sups: dict = {}
    if a is None:
        if sigma is None or tau is None:
            raise ValueError("pass an amplitude or a (sigma, tau) pair")
        sigma = sigma.canonical(n)
        shift = tau.substituted([se.sub(se.var(y), se.var(x)) for x, y in zip(xs, ys)])
        a = sigma.substitute({x: se.add(se.var(x), s) for x, s in zip(xs, shift)})
        tpts = (2.0 * qmc.Sobol(d=n, scramble=True, seed=seed).random_base2(9) - 1.0) * box[0]
        for order in range(1, 4 * n + 3):
            for alpha in multi_indices(n, order):
                for i in range(n):
                    val = se.evaluate(tau.derivative(i, alpha), tau.binding(tpts))
                    tau_sups[f"{i}:{alpha}"] = float(np.max(np.abs(val)))
    a = a.canonical(n)
    halfwidths = [box[0]] * n + [box[1]] * n + [box[2]] * n
    pts = _cv_points(n, halfwidths, samples, seed)
    names = xs + ys + ks
    binding = {v: pts[:, i] for i, v in enumerate(names)}
    top = 2 * n + 1
    orders = [idx for k in range(top + 1) for idx in multi_indices(n, k)]
    table: dict = {}
    for alpha in orders:
        da = a.diff_multi(xs, alpha)
        for beta in orders:
            dab = da.diff_multi(ys, beta)
            for gamma in orders:
                d = dab.diff_multi(ks, gamma)
                key = f"{alpha}|{beta}|{gamma}"
                if d.is_zero():
                    table[key] = 0.0
                    continue
                val = np.abs(np.broadcast_to(d.evaluate(binding), (pts.shape[0],)))
                if not np.all(np.isfinite(val)):
                    raise se.DomainError(f"non-finite derivative {key}")
                table[key] = float(np.max(val))
    return CVReport(max(table.values()), table, list(halfwidths), int(pts.shape[0]), tau_sups)


# ---------------------------------------------------------------------------
# Ellipticity and Garding


def ellipticity(sigma: ComplexSymbol, m: float, R0: float = 0.0, box=(math.pi, 16.0),
                n: int = 1, samples: int = 4096, seed: int = 0) -> float | None:
    """Sampled ``inf |sigma| / (1+|xi|)^m`` over ``|xi| >= R0``; ``None`` if below 1e-10."""
    sigma = sigma.canonical(n)
    xs, ks = symbol_vars(n)
    hx, hk = box
    sob = qmc.Sobol(d=2 * n, scramble=True, seed=seed).random_base2(
        max(1, math.ceil(math.log2(samples))))[:samples]
    per = 64 if n == 1 else 16
    lat = np.array(list(itertools.product(np.linspace(0, 1, per + 1), repeat=2 * n)))
    unit = np.vstack([sob, lat])
    half = np.array([hx] * n + [hk] * n)
    pts = (2.0 * unit - 1.0) * half
    xi = pts[:, n:]
    r = np.linalg.norm(xi, axis=1)
    keep = r >= R0
    b = {v: pts[keep, i] for i, v in enumerate(xs + ks)}
    vals = np.abs(np.broadcast_to(sigma.evaluate(b), (int(keep.sum()),)))
    ratio = vals / (1.0 + r[keep]) ** m
    c = float(np.min(ratio)) if ratio.size else 0.0
    return c if c >= 1e-10 else None


@dataclass
class GardingReport:
    """Fitted constants of ``Re<Au,u> >= C1 |u|_{H^m}^2 - C2 |u|_{H^s}^2``."""

    C1: float
    C2: float
    m: float
    s: float
    R: float
    min_generalized_eigenvalue: float
    verified: bool
    min_margin: float
    ok: bool

    def to_json(self) -> dict:
        return {"garding": asdict(self)}


def frequency_basis(grid: Grid) -> np.ndarray:
    """Unitary matrix whose columns are the discrete Fourier modes (row-major)."""
    P = grid.size
    phase = np.exp(1j * grid.points @ grid.freqs.T)
    return phase / math.sqrt(P)


def _hypothesis_radius(sigma: ComplexSymbol, m: float, grid: Grid, C: float = 1.0) -> float:
    """Smallest sampled radius beyond which Re sigma >= (C/2) (1+|xi|)^(2m) on the grid."""
    xs, ks = symbol_vars(grid.n)
    X, XI = grid.points, grid.freqs
    b = {x: X[:, a][:, None] for a, x in enumerate(xs)}
    b.update({k: XI[:, a][None, :] for a, k in enumerate(ks)})
    re = np.broadcast_to(np.real(sigma.evaluate(b)), (grid.size, grid.size))
    r = np.linalg.norm(XI, axis=1)
    bound = 0.5 * C * (1.0 + r) ** (2 * m)
    bad = np.any(re < bound[None, :], axis=0)
    return float(np.max(r[bad]) + 1e-9) if np.any(bad) else 0.0


def garding_check(sigma: ComplexSymbol, tau: QuantizingFunction, m: float, s: float,
                  grid: Grid, R: float | None = None) -> GardingReport:
    """Fit Garding constants for ``op_symbol(sigma, tau, grid)``.

    ``H = (A + A^H)/2`` is taken to the Fourier basis, where the Sobolev weights
    ``<xi>^{2m}`` are diagonal.  ``C1`` is half the smallest generalized
    eigenvalue of ``H`` against ``<xi>^{2m}`` on modes with ``|xi| >= R``, and
    ``C2`` the smallest shift making ``H - C1 <xi>^{2m} + C2 <xi>^{2s}``
    positive semidefinite.  The inequality is then verified on the eigenbasis.
    """
    if not s < m:
        raise ValueError("Garding check needs s < m")
    sigma = sigma.canonical(grid.n)
    A = op_symbol(sigma, tau, grid).matrix
    H = 0.5 * (A + A.conj().T)
    F = frequency_basis(grid)
    Ht = F.conj().T @ H @ F
    Ht = 0.5 * (Ht + Ht.conj().T)
    xi2 = np.sum(grid.freqs**2, axis=1)
    wm = (1.0 + xi2) ** m
    ws = (1.0 + xi2) ** s
    if R is None:
        R = _hypothesis_radius(sigma, m, grid)
    high = np.sqrt(xi2) >= R
    sub = Ht[np.ix_(high, high)] / np.sqrt(np.outer(wm[high], wm[high]))
    lam_min = float(np.linalg.eigvalsh(sub)[0]) if np.any(high) else 0.0
    C1 = 0.5 * lam_min
    ok = C1 > 0.0
    if not ok:
        return GardingReport(C1, float("nan"), m, s, R, lam_min, False, float("nan"), False)
    scaled = (Ht - C1 * np.diag(wm)) / np.sqrt(np.outer(ws, ws))
    mu = float(np.linalg.eigvalsh(scaled)[0])
    C2 = max(0.0, -mu) * (1.0 + 1e-9) + (1e-12 if mu < 0 else 0.0)
    # verification: Q = H - C1 Lm + C2 Ls >= 0 on every eigenvector
    Q = Ht - C1 * np.diag(wm) + C2 * np.diag(ws)
    evals, evecs = np.linalg.eigh(Ht)
    quad = np.real(np.einsum("ij,ik,kj->j", evecs.conj(), Q, evecs))
    norms = np.real(np.einsum("ij,i,ij->j", evecs.conj(), ws, evecs))
    margin = float(np.min(quad / norms))
    qmin = float(np.linalg.eigvalsh(Q / np.sqrt(np.outer(ws, ws)))[0])
    verified = margin >= -1e-9 and qmin >= -1e-9
    return GardingReport(C1, C2, m, s, R, lam_min, verified, min(margin, qmin), ok)
