"""
Periodic grids, the discrete Fourier transform convention and Sobolev norms.

Nodes are ``x_j = -L + j dx`` with ``dx = 2L/N`` and frequencies
``xi_q = (pi/L) q`` for ``q = -N/2 .. N/2-1`` on every axis.  The transform is

    u_hat(xi_q) = dx^n sum_j exp(-i x_j . xi_q) u(x_j),

with inverse ``(2 pi)^-n dxi^n sum_q exp(i x_j . xi_q) u_hat(xi_q)``.  Points
and frequencies are flattened in row-major (C) order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "dft",
    "idft",
    "sobolev_norm",
    "minimal_image",
    "read_grid_function",
    "write_grid_function",
    "central_probes",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)^n`` with ``N`` points per axis."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("grid dimension must be 1 or 2")
        if self.N < 8 or self.N % 2:
            raise ValueError("points per axis must be even and at least 8")
        if not self.L > 0:
            raise ValueError("half-length must be positive")
        object.__setattr__(self, "L", float(self.L))

    @property
    def size(self) -> int:
        return self.N**self.n

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        return math.pi / self.L

    @property
    def band(self) -> float:
        """Largest frequency magnitude pi N / (2L)."""
        return math.pi * self.N / (2.0 * self.L)

    @property
    def weight(self) -> float:
        """Quadrature factor (dx dxi / 2 pi)^n = N^-n."""
        return float(self.N) ** -self.n

    @cached_property
    def axis_nodes(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.N)

    @cached_property
    def axis_modes(self) -> np.ndarray:
        """Integer mode numbers q = -N/2 .. N/2-1."""
        return np.arange(-self.N // 2, self.N // 2)

    @cached_property
    def index(self) -> np.ndarray:
        """Integer node indices, shape (N^n, n)."""
        return _lattice(np.arange(self.N), self.n)

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers, shape (N^n, n)."""
        return _lattice(self.axis_modes, self.n)

    @cached_property
    def points(self) -> np.ndarray:
        """Node coordinates, shape (N^n, n)."""
        return -self.L + self.dx * self.index

    @cached_property
    def freqs(self) -> np.ndarray:
        """Frequencies, shape (N^n, n)."""
        return self.dxi * self.modes

    def header(self) -> str:
        return f"grid n={self.n} N={self.N} L={self.L!r}"


def _lattice(axis: np.ndarray, n: int) -> np.ndarray:
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=-1)


def minimal_image(d: np.ndarray, L: float) -> np.ndarray:
    """Representative of ``d`` modulo ``2L`` in ``[-L, L)``."""
    return d - 2.0 * L * np.floor((d + L) / (2.0 * L))


@dataclass
class GridFunction:
    """Complex samples on a grid, or spectral values on its frequencies."""

    grid: Grid
    values: np.ndarray
    spectral: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        if self.values.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {self.values.size}")

    @classmethod
    def from_callable(cls, grid: Grid, f) -> "GridFunction":
        return cls(grid, f(*grid.points.T))


def _sign(grid: Grid) -> np.ndarray:
    # exp(i L xi_q) = (-1)^q on each axis
    return np.where(grid.modes.sum(axis=1) % 2 == 0, 1.0, -1.0)


def dft(u: GridFunction) -> GridFunction:
    """Forward transform onto the frequency lattice."""
    if u.spectral:
        raise ValueError("dft expects values on nodes")
    g = u.grid
    shape = (g.N,) * g.n
    raw = np.fft.fftshift(np.fft.fftn(u.values.reshape(shape))).reshape(-1)
    return GridFunction(g, g.dx**g.n * _sign(g) * raw, spectral=True)


def idft(uh: GridFunction) -> GridFunction:
    """Inverse of :func:`dft`."""
    if not uh.spectral:
        raise ValueError("idft expects spectral values")
    g = uh.grid
    shape = (g.N,) * g.n
    raw = np.fft.ifftn(np.fft.ifftshift((_sign(g) * uh.values).reshape(shape))).reshape(-1)
    return GridFunction(g, raw / g.dx**g.n)


def sobolev_norm(u: GridFunction, s: float) -> float:
    """Discrete H^s norm ``((2 pi)^-n dxi^n sum <xi_q>^2s |u_hat_q|^2)^(1/2)``."""
    uh = u if u.spectral else dft(u)
    g = u.grid
    weight = (1.0 + np.sum(g.freqs**2, axis=1)) ** s
    total = np.sum(weight * np.abs(uh.values) ** 2)
    return float(np.sqrt((g.dxi / (2.0 * math.pi)) ** g.n * total))


def central_probes(grid: Grid, max_mode: float | None = None) -> np.ndarray:
    """Band-interior, centrally concentrated test functions as matrix columns.

    Gaussians of width L/10 centred at the origin, modulated by frequencies up
    to a quarter of the band.  Their spectra and their values beyond |x| = 3L/4
    are negligible at double precision.
    """
    g = grid
    if max_mode is None:
        max_mode = g.band / 4.0
    width = g.L / 10.0
    r2 = np.sum(g.points**2, axis=1)
    env = np.exp(-r2 / (2.0 * width**2))
    cols = []
    ks = np.linspace(-max_mode, max_mode, 9)
    for kv in itertools.product(ks, repeat=g.n):
        cols.append(env * np.exp(1j * g.points @ np.asarray(kv)))
    P = np.stack(cols, axis=1)
    return P / np.linalg.norm(P, axis=0)


def write_grid_function(path, u: GridFunction) -> None:
    lines = [f"# {u.grid.header()}"]
    lines += [f"{float(v.real)!r},{float(v.imag)!r}" for v in u.values]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_header(line: str) -> Grid:
    fields = dict(tok.split("=", 1) for tok in line.lstrip("#").split() if "=" in tok)
    return Grid(int(fields["n"]), int(fields["N"]), float(fields["L"]))


def read_grid_function(path, grid: Grid | None = None) -> GridFunction:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = next((ln for ln in lines if ln.startswith("# grid")), None)
    file_grid = _parse_header(header) if header else grid
    if file_grid is None:
        raise ValueError(f"{path}: missing grid header")
    if grid is not None and file_grid != grid:
        raise ValueError(f"{path}: grid {file_grid} does not match {grid}")
    vals = []
    for ln in lines:
        if ln.startswith("#"):
            continue
        re_, im_ = ln.split(",")
        vals.append(complex(float(re_), float(im_)))
    return GridFunction(file_grid, np.array(vals))
