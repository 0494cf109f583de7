import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tauquant import symexpr as se
from tauquant.discretize import Grid, GridFunction, dft
from tauquant.quantize import (ComplexSymbol, OperatorMatrix, apply, kn_fast_apply, op_amplitude,
                               op_oracle, op_symbol)
from tauquant.tau import from_spec, make_preset

from conftest import NONLINEAR, band, sym

TAUS = ["kn", "akn", "weyl", "linear:0.3", NONLINEAR]


def _mode(grid, q=1):
    return GridFunction.from_callable(grid, lambda x: np.exp(1j * q * grid.dxi * x))


@pytest.mark.parametrize("tau", TAUS)
@pytest.mark.parametrize("shape", [(1, 32, math.pi), (1, 16, 0.7), (2, 8, 2.0)])
def test_constant_symbol_is_identity(tau, shape):
    g = Grid(*shape)
    A = op_symbol(sym("1"), from_spec(tau, g.n) if tau != NONLINEAR or g.n == 1
                  else from_spec(f"{NONLINEAR.replace('w', 'w1')}, w2/2", 2), g)
    assert np.max(np.abs(A.matrix - np.eye(g.size))) <= 1e-12
    assert A.provenance["path"] == "standard"


def test_k_acts_on_fourier_mode(grid64, presets):
    u = _mode(grid64)
    v = apply(op_symbol(sym("k"), presets["kn"], grid64), u)
    assert np.max(np.abs(v.values - u.values)) <= 1e-12
    w = kn_fast_apply(sym("k^2"), grid64, u)
    assert np.max(np.abs(w.values - u.values)) <= 1e-12
    assert np.max(np.abs(kn_fast_apply(sym("1"), grid64, u).values - u.values)) <= 1e-12


# odd-in-k symbols need decay before the unpaired Nyquist mode
@pytest.mark.parametrize("text", ["cos(x)+k^2/(1+k^2)", "sin(x)*k*exp(-((k/6)^2))",
                                  "exp(cos(x))*atan(k)*exp(-((k/6)^2)) + jb(k)"])
def test_weyl_real_symbol_is_hermitian(grid64, presets, text):
    A = op_symbol(sym(text), presets["weyl"], grid64).matrix
    assert np.max(np.abs(A - A.conj().T)) <= 1e-12


def test_amplitude_from_substitution_matches_symbol(grid64, nonlinear_tau):
    s = sym("cos(x)*jb(k) + x", "sin(k)")
    for tau in (make_preset("weyl", 1), nonlinear_tau):
        v = se.add(se.var("x"), tau.substituted([se.sub(se.var("y"), se.var("x"))])[0])
        a = s.substitute({"x": v})
        diff = op_amplitude(a, grid64).matrix - op_symbol(s, tau, grid64).matrix
        assert np.max(np.abs(diff)) <= 1e-14


def test_amplitude_multiplication_operator(grid64):
    A = op_amplitude(sym("sin(x)"), grid64).matrix
    np.testing.assert_allclose(A, np.diag(np.sin(grid64.points[:, 0])), atol=1e-14)


def test_separable_amplitude_factorises(grid64):
    x = grid64.points[:, 0]
    f, g = np.cos(x) + 2, np.exp(np.sin(x))
    A = op_amplitude(sym("(cos(x) + 2)*exp(sin(y))*jb(k)"), grid64).matrix
    # multiplier matrix built directly from the Fourier sum
    xi = grid64.freqs[:, 0]
    Mh = np.exp(1j * np.subtract.outer(x, x)[:, :, None] * xi) @ np.sqrt(1 + xi**2) / grid64.N
    np.testing.assert_allclose(A, np.diag(f) @ Mh @ np.diag(g), atol=1e-12)


def test_multiplier_independent_of_tau(grid64, presets, nonlinear_tau):
    s = sym(band(5.0), "atan(k)")
    ref = op_symbol(s, presets["kn"], grid64).matrix
    for tau in (presets["akn"], presets["weyl"], nonlinear_tau):
        assert np.array_equal(op_symbol(s, tau, grid64).matrix, ref)


def test_oracle_basic_examples(grid64, presets):
    A = op_oracle(sym("1"), presets["weyl"], grid64)
    assert np.max(np.abs(A.matrix - np.eye(64))) <= 1e-12
    assert A.provenance["path"] == "oracle"
    kn = op_oracle(sym("k"), presets["kn"], grid64).matrix
    wy = op_oracle(sym("k"), presets["weyl"], grid64).matrix
    assert np.array_equal(kn, wy)


_sym_pool = ["cos(x)*jb(k)", "x*k", "sin(x + k/3)", "exp(-(x^2))*atan(k)",
             "ramp(x)*k^2/(4+k^2)", "tanh(x)*cos(k)", "1/(2 + sin(x)*cos(k))"]
_tau_pool = TAUS + ["w + 0.2*atan(w)", "0.4*w - 0.05*tanh(w)"]


@settings(max_examples=20)
@given(st.sampled_from(_sym_pool), st.sampled_from(_sym_pool), st.sampled_from(_tau_pool),
       st.sampled_from([(16, 1.0), (32, math.pi), (24, 2.5)]))
def test_oracle_agrees_with_assembly(re, im, tau, shape):
    g = Grid(1, *shape)
    s, t = sym(re, im), from_spec(tau, 1)
    diff = op_symbol(s, t, g).matrix - op_oracle(s, t, g).matrix
    assert np.max(np.abs(diff)) <= 1e-10


def test_oracle_in_two_dimensions():
    g = Grid(2, 8, 1.5)
    s = sym("cos(x1)*k2 + x2*jb(k1,k2)", "sin(x1*k1)", n=2)
    t = from_spec("w1/2 + 0.1*sin(w2), w2/2", 2)
    assert np.max(np.abs(op_symbol(s, t, g).matrix - op_oracle(s, t, g).matrix)) <= 1e-10


def test_apply_matches_kernel_sum(grid64, presets, rng):
    A = op_symbol(sym("cos(x)*jb(k)"), presets["weyl"], grid64)
    u = GridFunction(grid64, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    direct = np.array([sum(A.matrix[j, l] * u.values[l] for l in range(64)) for j in range(64)])
    assert np.max(np.abs(apply(A, u).values - direct)) <= 1e-12
    with pytest.raises(ValueError):
        apply(A, GridFunction(Grid(1, 64, 1.0), u.values))


def test_kn_fast_apply_matches_assembly(grid64, presets, rng):
    coeffs = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    u = GridFunction.from_callable(
        grid64, lambda x: sum(c * np.exp(1j * (q - 10) * x) for q, c in enumerate(coeffs)))
    for text in ("jb(k)", "sin(x)*k + cos(2*x)"):
        s = sym(text)
        fast = kn_fast_apply(s, grid64, u).values
        slow = apply(op_symbol(s, presets["kn"], grid64), u).values
        assert np.max(np.abs(fast - slow)) <= 1e-10


@given(st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(_tau_pool))
def test_linearity(alpha, beta, tau):
    g = Grid(1, 16, 1.0)
    t = from_spec(tau, 1)
    s1, s2 = sym("cos(x)*k"), sym("jb(k)", "x")
    combo = s1.scale(alpha) + s2.scale(beta)
    lhs = op_symbol(combo, t, g).matrix
    rhs = alpha * op_symbol(s1, t, g).matrix + beta * op_symbol(s2, t, g).matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, abs(alpha) + abs(beta))


def test_workers_do_not_change_bits(grid128, nonlinear_tau):
    s = sym("cos(x)*jb(k)", "sin(x*k)")
    one = op_symbol(s, nonlinear_tau, grid128, workers=1).matrix
    many = op_symbol(s, nonlinear_tau, grid128, workers=4).matrix
    assert np.array_equal(one, many)
    a = sym("cos(x - y)*k")
    assert np.array_equal(op_amplitude(a, grid128, workers=1).matrix,
                          op_amplitude(a, grid128, workers=3).matrix)


def test_variable_checks(grid64, presets):
    with pytest.raises(ValueError):
        op_symbol(sym("y*k"), presets["kn"], grid64)
    with pytest.raises(ValueError):
        op_symbol(sym("k"), make_preset("kn", 2), grid64)
    with pytest.raises(ValueError):
        op_amplitude(sym("z"), grid64)


def test_csv_round_trip(tmp_path, grid64, presets):
    A = op_symbol(sym("cos(x)*k", "x"), presets["weyl"], grid64)
    path = tmp_path / "A.csv"
    A.write_csv(path)
    first = path.read_text().splitlines()[0]
    assert first.startswith("# operator N=64 grid n=1 N=64")
    B = OperatorMatrix.read_csv(path)
    assert np.array_equal(A.matrix, B.matrix)
    assert B.provenance == A.provenance and B.grid == grid64


def test_complex_symbol_algebra():
    s = sym("x", "k")
    assert (s * s.conj()).evaluate({"x": 3.0, "k": 4.0}) == pytest.approx(25.0)
    r = s.reciprocal()
    assert r.evaluate({"x": 3.0, "k": 4.0}) == pytest.approx(1 / (3 + 4j))
    assert s.diff("k").evaluate({}) == pytest.approx(1j)
    assert (s - s).is_zero()
    assert ComplexSymbol.of(2 - 1j).evaluate({}) == 2 - 1j
