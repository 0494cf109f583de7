import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tauquant.discretize import (Grid, GridFunction, central_probes, dft, idft, minimal_image,
                                 read_grid_function, sobolev_norm, write_grid_function)


def _random(grid, seed, real=False):
    r = np.random.default_rng(seed)
    v = r.standard_normal(grid.size)
    if not real:
        v = v + 1j * r.standard_normal(grid.size)
    return GridFunction(grid, v)


def test_grid_constants(grid64):
    assert grid64.dx * grid64.dxi * grid64.N == pytest.approx(2 * math.pi, rel=1e-15)
    assert grid64.axis_modes[0] == -32 and grid64.axis_modes[-1] == 31
    assert grid64.points[0, 0] == -math.pi
    g2 = Grid(2, 8, 1.0)
    assert g2.points.shape == (64, 2)
    # row-major: the second coordinate varies fastest
    assert g2.points[1, 0] == g2.points[0, 0] and g2.points[1, 1] > g2.points[0, 1]


@pytest.mark.parametrize("args", [(3, 16, 1.0), (1, 7, 1.0), (1, 6, 1.0), (1, 16, 0.0)])
def test_grid_validation(args):
    with pytest.raises(ValueError):
        Grid(*args)


def test_size_mismatch(grid64):
    with pytest.raises(ValueError):
        GridFunction(grid64, np.ones(10))


def test_dft_of_constant_and_pure_mode(grid64):
    uh = dft(GridFunction(grid64, np.ones(64)))
    q0 = np.flatnonzero(grid64.modes[:, 0] == 0)[0]
    assert uh.values[q0] == pytest.approx(2 * math.pi, rel=1e-14)
    rest = np.delete(uh.values, q0)
    assert np.max(np.abs(rest)) < 1e-13
    uh = dft(GridFunction.from_callable(grid64, lambda x: np.exp(1j * x)))
    q1 = np.flatnonzero(grid64.modes[:, 0] == 1)[0]
    assert uh.values[q1] == pytest.approx(2 * math.pi, rel=1e-14)
    assert np.max(np.abs(np.delete(uh.values, q1))) < 1e-13


def test_dft_matches_defining_sum(grid64):
    u = _random(grid64, 3)
    x, xi = grid64.points[:, 0], grid64.freqs[:, 0]
    direct = grid64.dx * np.exp(-1j * np.outer(xi, x)) @ u.values
    np.testing.assert_allclose(dft(u).values, direct, atol=1e-12)


@given(st.integers(0, 2**31 - 1), st.sampled_from([(1, 16, 1.0), (1, 64, math.pi), (2, 8, 2.0)]))
def test_round_trip_and_parseval(seed, shape):
    g = Grid(*shape)
    u = _random(g, seed)
    uh = dft(u)
    assert np.max(np.abs(idft(uh).values - u.values)) <= 1e-12
    lhs = g.dx**g.n * np.sum(np.abs(u.values) ** 2)
    rhs = (2 * math.pi) ** -g.n * g.dxi**g.n * np.sum(np.abs(uh.values) ** 2)
    assert rhs == pytest.approx(lhs, rel=1e-10)
    assert sobolev_norm(u, 0.0) == pytest.approx(math.sqrt(lhs), rel=1e-10)


def test_sobolev_examples(grid64):
    assert sobolev_norm(GridFunction(grid64, np.ones(64)), 0) == pytest.approx(math.sqrt(2 * math.pi))
    e1 = GridFunction.from_callable(grid64, lambda x: np.exp(1j * x))
    assert sobolev_norm(e1, 1) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-13)


@given(st.integers(0, 2**31 - 1), st.floats(-2, 2), st.floats(0, 2))
def test_sobolev_monotone_in_s(seed, s, ds):
    u = _random(Grid(1, 32, 2.0), seed)
    assert sobolev_norm(u, s) <= sobolev_norm(u, s + ds) * (1 + 1e-14)


@given(st.integers(0, 2**31 - 1))
def test_real_input_has_hermitian_spectrum(seed):
    g = Grid(1, 32, 1.5)
    uh = dft(_random(g, seed, real=True)).values
    q = g.modes[:, 0]
    for i in np.flatnonzero(q > -16):
        j = np.flatnonzero(q == -q[i])[0]
        assert abs(uh[j] - np.conj(uh[i])) <= 1e-12 * max(1.0, abs(uh[i]))


def test_band_limited_modes_recovered_exactly():
    g = Grid(1, 32, 3.0)
    coeffs = {-7: 1.5, 0: -0.25j, 5: 2.0 + 1.0j}
    u = GridFunction.from_callable(g, lambda x: sum(c * np.exp(1j * q * g.dxi * x)
                                                    for q, c in coeffs.items()))
    uh = dft(u).values / (2 * g.L)
    for i, q in enumerate(g.modes[:, 0]):
        assert abs(uh[i] - coeffs.get(int(q), 0)) <= 1e-12


def test_minimal_image():
    d = np.array([-3.5, -1.0, 0.0, 1.0, 2.5, 3.0])
    np.testing.assert_allclose(minimal_image(d, 3.0), [2.5, -1.0, 0.0, 1.0, 2.5, -3.0])


def test_central_probes_are_normalised_and_localised(grid128):
    P = central_probes(grid128)
    np.testing.assert_allclose(np.linalg.norm(P, axis=0), 1.0)
    outer = np.abs(grid128.points[:, 0]) > 0.75 * grid128.L
    assert np.max(np.abs(P[outer])) < 1e-12


def test_file_round_trip(tmp_path, grid64):
    u = _random(grid64, 11)
    path = tmp_path / "u.csv"
    write_grid_function(path, u)
    text = path.read_text().splitlines()
    assert text[0] == "# grid n=1 N=64 L=3.141592653589793"
    back = read_grid_function(path)
    assert back.grid == grid64
    np.testing.assert_array_equal(back.values, u.values)
    with pytest.raises(ValueError):
        read_grid_function(path, Grid(1, 32, math.pi))
