"""
Dense matrices of tau-quantized and amplitude operators on periodic grids.

On a grid the operator of a symbol sigma is

    A[j, l] = N^-n sum_q exp(i (x_j - y_l) . xi_q) sigma(x_j + tau(m(y_l - x_j)), xi_q)

where ``m`` is the minimal image in ``[-L, L)^n``.  Amplitudes a(x, y, xi) are
evaluated at ``y = x_j + m(y_l - x_j)``, so that an amplitude obtained by
substituting ``x -> x + tau(y - x)`` into a symbol reproduces the symbol's
matrix.  The phase is taken from an exact table of N-th roots of unity.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import symexpr as se
from .discretize import Grid, GridFunction, dft
from .symexpr import SymbolExpr
from .tau import QuantizingFunction

__all__ = [
    "ComplexSymbol",
    "OperatorMatrix",
    "op_symbol",
    "op_amplitude",
    "op_oracle",
    "apply",
    "kn_fast_apply",
    "symbol_vars",
    "amplitude_vars",
]

# Elements of the (rows, N^n, N^n) work array per chunk.  Chunks depend only
# on the grid, never on the worker count, which keeps assembly bit-identical.
_CHUNK_ELEMENTS = 1 << 19
_UNIQUE_LIMIT = 1 << 22


def symbol_vars(n: int) -> tuple[list[str], list[str]]:
    return se.axis_names("x", n), se.axis_names("k", n)


def amplitude_vars(n: int) -> tuple[list[str], list[str], list[str]]:
    return se.axis_names("x", n), se.axis_names("y", n), se.axis_names("k", n)


@dataclass(frozen=True)
class ComplexSymbol:
    """A complex-valued function given by real and imaginary expressions."""

    re: SymbolExpr
    im: SymbolExpr = se.const(0.0)

    @classmethod
    def parse(cls, re: str, im: str = "0", n: int = 1) -> "ComplexSymbol":
        return cls(se.parse(re), se.parse(im)).canonical(n)

    @classmethod
    def of(cls, value) -> "ComplexSymbol":
        value = complex(value)
        return cls(se.const(value.real), se.const(value.imag))

    def canonical(self, n: int) -> "ComplexSymbol":
        return ComplexSymbol(se.canonical_names(self.re, n), se.canonical_names(self.im, n))

    @property
    def is_real(self) -> bool:
        return self.im.kind == "const" and self.im.value == 0.0

    def free_vars(self) -> set[str]:
        return se.free_vars(self.re) | se.free_vars(self.im)

    def __add__(self, other: "ComplexSymbol") -> "ComplexSymbol":
        return ComplexSymbol(se.add(self.re, other.re), se.add(self.im, other.im))

    def __sub__(self, other: "ComplexSymbol") -> "ComplexSymbol":
        return ComplexSymbol(se.sub(self.re, other.re), se.sub(self.im, other.im))

    def __neg__(self) -> "ComplexSymbol":
        return ComplexSymbol(se.neg(self.re), se.neg(self.im))

    def __mul__(self, other: "ComplexSymbol") -> "ComplexSymbol":
        a, b, c, d = self.re, self.im, other.re, other.im
        return ComplexSymbol(se.sub(se.mul(a, c), se.mul(b, d)),
                             se.add(se.mul(a, d), se.mul(b, c)))

    def scale(self, c: complex) -> "ComplexSymbol":
        return self * ComplexSymbol.of(c)

    def times_real(self, r: SymbolExpr) -> "ComplexSymbol":
        return ComplexSymbol(se.mul(self.re, r), se.mul(self.im, r))

    def conj(self) -> "ComplexSymbol":
        return ComplexSymbol(self.re, se.neg(self.im))

    def abs2(self) -> SymbolExpr:
        return se.add(se.mul(self.re, self.re), se.mul(self.im, self.im))

    def reciprocal(self) -> "ComplexSymbol":
        d = self.abs2()
        return ComplexSymbol(se.div(self.re, d), se.div(se.neg(self.im), d))

    def diff(self, v: str) -> "ComplexSymbol":
        return ComplexSymbol(se.diff(self.re, v), se.diff(self.im, v))

    def diff_multi(self, names: list[str], orders) -> "ComplexSymbol":
        orders = list(orders)
        return ComplexSymbol(se.diff_multi(self.re, names, orders),
                             se.diff_multi(self.im, names, orders))

    def substitute(self, mapping: Mapping[str, SymbolExpr]) -> "ComplexSymbol":
        return ComplexSymbol(se.substitute(self.re, mapping), se.substitute(self.im, mapping))

    def is_zero(self) -> bool:
        return all(e.kind == "const" and e.value == 0.0 for e in (self.re, self.im))

    def evaluate(self, binding: Mapping[str, object]):
        re = se.evaluate(self.re, binding)
        if self.is_real:
            return np.asarray(re, dtype=float) + 0j
        return np.asarray(re) + 1j * np.asarray(se.evaluate(self.im, binding))

    def node_count(self) -> int:
        return se.node_count(self.re) + se.node_count(self.im)

    def text(self) -> tuple[str, str]:
        return se.to_text(self.re), se.to_text(self.im)

    def brief_text(self) -> tuple[str, str]:
        return se.brief_text(self.re), se.brief_text(self.im)

    def __str__(self) -> str:
        re, im = self.text()
        return re if self.is_real else f"({re}) + i*({im})"


@dataclass
class OperatorMatrix:
    """Dense matrix of an operator on ``grid`` with a provenance record."""

    grid: Grid
    matrix: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        p = self.grid.size
        if self.matrix.shape != (p, p):
            raise ValueError(f"matrix shape {self.matrix.shape} does not fit grid size {p}")

    def write_csv(self, path) -> None:
        lines = [f"# operator N={self.grid.size} {self.grid.header()}"]
        for key in sorted(self.provenance):
            lines.append(f"# {key}: {json.dumps(self.provenance[key])}")
        for row in self.matrix:
            lines.append(",".join(f"{v.real:.17g};{v.imag:.17g}" for v in row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def read_csv(cls, path) -> "OperatorMatrix":
        grid, prov, rows = None, {}, []
        with open(path) as fh:
            for ln in fh:
                ln = ln.strip()
                if not ln:
                    continue
                if ln.startswith("# operator"):
                    f = dict(t.split("=", 1) for t in ln[1:].split() if "=" in t)
                    grid = Grid(int(f["n"]), int(f["N"]), float(f["L"]))
                elif ln.startswith("#"):
                    key, _, val = ln[1:].strip().partition(": ")
                    prov[key] = json.loads(val)
                else:
                    rows.append([complex(float(a), float(b))
                                 for a, b in (e.split(";") for e in ln.split(","))])
        if grid is None:
            raise ValueError(f"{path}: missing operator header")
        return cls(grid, np.array(rows, dtype=complex), prov)


# ---------------------------------------------------------------------------
# Assembly helpers


def _check_vars(sym: ComplexSymbol, allowed: list[str], what: str) -> None:
    extra = sym.free_vars() - set(allowed)
    if extra:
        raise ValueError(f"{what} may only use {allowed}, found {sorted(extra)}")


def _roots(N: int) -> np.ndarray:
    k = np.arange(N)
    return np.cos(2.0 * np.pi * k / N) + 1j * np.sin(2.0 * np.pi * k / N)


def _offsets(grid: Grid) -> np.ndarray:
    """Minimal-image displacements for every index offset, shape (N^n, n)."""
    N = grid.N
    o = grid.index
    return ((o + N // 2) % N - N // 2) * grid.dx


def _offset_index(grid: Grid, rows: np.ndarray) -> np.ndarray:
    """Flat index of the offset (l - j) mod N for rows j, all columns l."""
    N = grid.N
    idx = grid.index
    diff = (idx[None, :, :] - idx[rows][:, None, :]) % N
    flat = np.zeros(diff.shape[:2], dtype=np.int64)
    for a in range(grid.n):
        flat = flat * N + diff[..., a]
    return flat


def _phase(grid: Grid, rows: np.ndarray, roots: np.ndarray) -> np.ndarray:
    """exp(i (x_j - y_l) . xi_q) for rows j, shape (rows, N^n, N^n)."""
    N = grid.N
    idx, modes = grid.index, grid.modes
    expo = np.zeros((rows.size, grid.size, grid.size), dtype=np.int64)
    for a in range(grid.n):
        d = idx[rows, a][:, None] - idx[:, a][None, :]
        expo += d[:, :, None] * modes[:, a][None, None, :]
    return roots[expo % N]


def _chunks(grid: Grid) -> list[np.ndarray]:
    p = grid.size
    step = max(1, _CHUNK_ELEMENTS // (p * p))
    return [np.arange(s, min(s + step, p)) for s in range(0, p, step)]


def _run(grid: Grid, work, workers: int | None) -> np.ndarray:
    out = np.empty((grid.size, grid.size), dtype=complex)
    chunks = _chunks(grid)

    def task(rows):
        out[rows] = work(rows)

    if workers is None or workers <= 1:
        for rows in chunks:
            task(rows)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(task, chunks))
    return out


def _reduce(phase: np.ndarray, values) -> np.ndarray:
    vals = np.broadcast_to(values, phase.shape)
    return np.sum(phase * vals, axis=2)


def _tau_at_offsets(tau: QuantizingFunction, grid: Grid) -> np.ndarray:
    return tau.evaluate(_offsets(grid))


def op_symbol(sigma: ComplexSymbol, tau: QuantizingFunction, grid: Grid,
              workers: int | None = None) -> OperatorMatrix:
    """Matrix of the tau-quantization of ``sigma`` on ``grid``.

    Parameters
    ----------
    sigma : ComplexSymbol
        Expression in ``x`` and ``k`` variables of the grid dimension.
    tau : QuantizingFunction
    grid : Grid
    workers : int, optional
        Threads used for row-parallel assembly.  The result does not depend on
        this value.
    """
    if tau.dim != grid.n:
        raise ValueError(f"tau has dimension {tau.dim}, grid has {grid.n}")
    sigma = sigma.canonical(grid.n)
    xs, ks = symbol_vars(grid.n)
    _check_vars(sigma, xs + ks, "symbol")
    P, n = grid.size, grid.n
    X, XI = grid.points, grid.freqs
    T = _tau_at_offsets(tau, grid)
    roots = _roots(grid.N)
    w = grid.weight
    kbind = {k: XI[:, a] for a, k in enumerate(ks)}

    all_rows = np.arange(P)
    offs = _offset_index(grid, all_rows)
    V = X[:, None, :] + T[offs]
    uniq, inverse = np.unique(V.reshape(-1, n), axis=0, return_inverse=True)
    inverse = inverse.reshape(P, P)
    if uniq.shape[0] * P <= _UNIQUE_LIMIT:
        b = {x: uniq[:, a][:, None] for a, x in enumerate(xs)}
        b.update({k: v[None, :] for k, v in kbind.items()})
        table = np.broadcast_to(sigma.evaluate(b), (uniq.shape[0], P))

        def work(rows):
            return w * _reduce(_phase(grid, rows, roots), table[inverse[rows]])
    else:
        def work(rows):
            b = {x: V[rows][:, :, a][:, :, None] for a, x in enumerate(xs)}
            b.update({k: v[None, None, :] for k, v in kbind.items()})
            return w * _reduce(_phase(grid, rows, roots), sigma.evaluate(b))

    mat = _run(grid, work, workers)
    _check_finite(mat)
    re, im = sigma.brief_text()
    return OperatorMatrix(grid, mat, {"symbol_re": re, "symbol_im": im,
                                      "tau": tau.name if tau.name != "custom" else tau.text(),
                                      "path": "standard"})


def op_amplitude(a: ComplexSymbol, grid: Grid, workers: int | None = None) -> OperatorMatrix:
    """Matrix of the amplitude operator of ``a(x, y, k)``.

    ``y`` is evaluated at the minimal-image representative nearest ``x_j``.
    """
    a = a.canonical(grid.n)
    xs, ys, ks = amplitude_vars(grid.n)
    _check_vars(a, xs + ys + ks, "amplitude")
    X, XI = grid.points, grid.freqs
    D = _offsets(grid)
    roots = _roots(grid.N)
    w = grid.weight

    def work(rows):
        offs = _offset_index(grid, rows)
        b = {}
        for ax in range(grid.n):
            b[xs[ax]] = X[rows, ax][:, None, None]
            b[ys[ax]] = (X[rows, ax][:, None] + D[offs, ax])[:, :, None]
            b[ks[ax]] = XI[:, ax][None, None, :]
        return w * _reduce(_phase(grid, rows, roots), a.evaluate(b))

    mat = _run(grid, work, workers)
    _check_finite(mat)
    re, im = a.brief_text()
    return OperatorMatrix(grid, mat, {"amplitude_re": re, "amplitude_im": im,
                                      "path": "amplitude"})


def _check_finite(mat: np.ndarray) -> None:
    if not np.all(np.isfinite(mat)):
        raise se.DomainError("non-finite matrix entries")


def apply(A: OperatorMatrix, u: GridFunction) -> GridFunction:
    """Matrix-vector product; quadrature weights are part of the matrix."""
    if A.grid != u.grid or u.spectral:
        raise ValueError("operator and function live on different grids")
    return GridFunction(u.grid, A.matrix @ u.values)


def kn_fast_apply(sigma: ComplexSymbol, grid: Grid, u: GridFunction) -> GridFunction:
    """Apply the Kohn-Nirenberg operator of ``sigma`` through one forward DFT.

    ``v(x_j) = (2 pi)^-n dxi^n sum_q exp(i x_j . xi_q) sigma(x_j, xi_q) u_hat(xi_q)``
    """
    if u.grid != grid or u.spectral:
        raise ValueError("function does not live on this grid")
    sigma = sigma.canonical(grid.n)
    xs, ks = symbol_vars(grid.n)
    _check_vars(sigma, xs + ks, "symbol")
    uh = dft(u).values
    X, XI = grid.points, grid.freqs
    b = {x: X[:, a][:, None] for a, x in enumerate(xs)}
    b.update({k: XI[:, a][None, :] for a, k in enumerate(ks)})
    S = np.broadcast_to(sigma.evaluate(b), (grid.size, grid.size))
    roots = _roots(grid.N)
    expo = (grid.index @ grid.modes.T) % grid.N
    sign = np.where(grid.modes.sum(axis=1) % 2 == 0, 1.0, -1.0)
    E = roots[expo] * sign[None, :]
    scale = (grid.dxi / (2.0 * math.pi)) ** grid.n
    return GridFunction(grid, scale * ((E * S) @ uh))


# ---------------------------------------------------------------------------
# Independent oracle.  It compiles expressions to straight-line numpy code,
# computes phases in floating point, and accumulates frequencies in reverse
# order with Kahan compensation.  Nothing above is reused.


def _compile(expr: SymbolExpr, argnames: list[str]):
    lines, names = [], {}

    def emit(node):
        key = id(node)
        if key in names:
            return names[key]
        k = node.kind
        if k == "const":
            src = repr(node.value)
        elif k == "var":
            if node.name not in argnames:
                raise ValueError(f"unexpected variable {node.name!r}")
            src = node.name
        elif k == "add":
            src = f"({emit(node.args[0])} + {emit(node.args[1])})"
        elif k == "mul":
            src = f"({emit(node.args[0])} * {emit(node.args[1])})"
        elif k == "div":
            src = f"({emit(node.args[0])} / {emit(node.args[1])})"
        elif k == "neg":
            src = f"(-{emit(node.args[0])})"
        elif k == "pow":
            src = f"np.power({emit(node.args[0])}, {node.args[1].value!r})"
        else:
            args = [emit(a) for a in node.args]
            if node.name == "jb":
                src = "np.sqrt(1.0 + " + " + ".join(f"{a}*{a}" for a in args) + ")"
            elif node.name.startswith("ramp"):
                src = f"_{node.name}({args[0]})"
            else:
                src = f"np.{ {'atan': 'arctan'}.get(node.name, node.name)}({args[0]})"
        name = f"t{len(lines)}"
        lines.append(f"    {name} = {src}")
        names[key] = name
        return name

    out = emit(expr)
    code = f"def f({', '.join(argnames)}):\n" + "\n".join(lines) + f"\n    return {out}\n"
    env = {"np": np, **_ORACLE_RAMPS}
    exec(code, env)
    return env["f"]


def _oracle_ramp(t):
    s = np.minimum(np.maximum(t, 0.0), 1.0)
    return 3.0 * s**2 - 2.0 * s**3


_ORACLE_RAMPS = {
    "_ramp": _oracle_ramp,
    "_ramp1": lambda t: np.where((t > 0) & (t < 1), 6.0 * t - 6.0 * t**2, 0.0),
    "_ramp2": lambda t: np.where((t > 0) & (t < 1), 6.0 - 12.0 * t, 0.0),
    "_ramp3": lambda t: np.where((t > 0) & (t < 1), -12.0, 0.0),
}


def op_oracle(sigma: ComplexSymbol, tau: QuantizingFunction, grid: Grid) -> OperatorMatrix:
    """Brute-force reference assembly of :func:`op_symbol`."""
    if tau.dim != grid.n:
        raise ValueError(f"tau has dimension {tau.dim}, grid has {grid.n}")
    n = grid.n
    sigma = sigma.canonical(n)
    xs, ks = symbol_vars(n)
    ws = se.axis_names("w", n)
    f_re = _compile(sigma.re, xs + ks)
    f_im = _compile(sigma.im, xs + ks)
    f_tau = [_compile(c, ws) for c in tau.components]

    axis = -grid.L + (2.0 * grid.L / grid.N) * np.arange(grid.N)
    pts = np.array(np.meshgrid(*([axis] * n), indexing="ij")).reshape(n, -1).T
    q = np.arange(-grid.N // 2, grid.N // 2) * (np.pi / grid.L)
    frq = np.array(np.meshgrid(*([q] * n), indexing="ij")).reshape(n, -1).T
    P = pts.shape[0]

    # Offsets from integer indices: a float floor() misplaces the tie at +-L.
    ind = np.array(np.meshgrid(*([np.arange(grid.N)] * n), indexing="ij")).reshape(n, -1).T
    half = grid.N // 2
    d = (np.mod(ind[None, :, :] - ind[:, None, :] + half, grid.N) - half) * (2.0 * grid.L / grid.N)
    tv = np.stack([np.broadcast_to(f(*[d[..., a] for a in range(n)]), (P, P))
                   for f in f_tau], axis=-1)
    v = pts[:, None, :] + tv
    sep = pts[:, None, :] - pts[None, :, :]

    acc = np.zeros((P, P), dtype=complex)
    comp = np.zeros((P, P), dtype=complex)
    with np.errstate(all="ignore"):
        for iq in range(P - 1, -1, -1):
            xi = frq[iq]
            args = [v[..., a] for a in range(n)] + [np.full((P, P), xi[a]) for a in range(n)]
            val = np.broadcast_to(f_re(*args), (P, P)) + 1j * np.broadcast_to(f_im(*args), (P, P))
            term = np.exp(1j * (sep @ xi)) * val
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
    if not np.all(np.isfinite(acc)):
        raise se.DomainError("non-finite oracle entries")
    scale = ((2.0 * grid.L / grid.N) * (np.pi / grid.L) / (2.0 * np.pi)) ** n
    re, im = sigma.brief_text()
    return OperatorMatrix(grid, scale * acc, {"symbol_re": re, "symbol_im": im,
                                              "tau": tau.name, "path": "oracle"})
