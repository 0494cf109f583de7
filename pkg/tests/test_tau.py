from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tauquant import symexpr as se
from tauquant.tau import (NewtonError, QuantizingFunction, check_admissible, dual,
                          from_spec, invert_tau_x, invert_tau_x_batch, make_preset, taylor)

from conftest import NONLINEAR

BOX = np.linspace(-5.0, 5.0, 201)[:, None]


def test_preset_components():
    assert make_preset("weyl", 1).text() == ["w/2"]
    assert make_preset("kn", 2).text() == ["0", "0"]
    assert make_preset("akn", 2).text() == ["w1", "w2"]
    lin = make_preset("linear", 1, s=0.3)
    assert lin.evaluate(np.array([[10.0]]))[0, 0] == pytest.approx(3.0, rel=1e-15)
    assert from_spec("linear:0.3", 1).evaluate(np.array([[10.0]]))[0, 0] == pytest.approx(3.0)


def test_unknown_preset_and_bad_tau():
    with pytest.raises(ValueError):
        make_preset("moyal", 1)
    with pytest.raises(ValueError, match="not zero"):
        from_spec("w + 1", 1)
    with pytest.raises(ValueError):
        from_spec("w1, w2", 1)
    with pytest.raises(ValueError):
        from_spec("x", 1)


def test_polynomial_detection():
    assert make_preset("weyl", 1).is_polynomial
    assert from_spec("w1/2, w2/2 + w1^2", 2).degree == 2
    assert not from_spec(NONLINEAR, 1).is_polynomial


def test_dual_examples():
    assert dual(make_preset("kn", 1)).text() == ["w"]
    assert dual(make_preset("weyl", 1)).evaluate(BOX) == pytest.approx(BOX / 2)
    d = dual(make_preset("linear", 1, s=0.3))
    np.testing.assert_allclose(d.evaluate(BOX), 0.7 * BOX, rtol=1e-15)
    assert d.name == "linear:0.7"


@pytest.mark.parametrize("text", ["kn", "akn", "weyl", "linear:0.25", NONLINEAR,
                                  "w + 0.2*atan(w)", "w/3 + w^2/5"])
def test_dual_is_involution(text):
    tau = from_spec(text, 1)
    twice = dual(dual(tau))
    np.testing.assert_allclose(twice.evaluate(BOX), tau.evaluate(BOX), atol=1e-12)
    if tau.is_polynomial:
        assert twice.polynomial == tau.polynomial


def test_admissibility_examples():
    r = check_admissible(make_preset("weyl", 1))
    assert r.mu_hat == 0 and r.bounded_derivatives and r.hadamard_ok
    assert r.min_jacobian == pytest.approx(0.5)
    r = check_admissible(from_spec(NONLINEAR, 1))
    assert r.bounded_derivatives and r.hadamard_ok
    assert 0.4 - 1e-12 <= r.min_jacobian <= 0.6
    r = check_admissible(from_spec("w^2", 1))
    assert r.tau0_residual == 0.0
    assert not r.hadamard_ok


@pytest.mark.parametrize("name", ["kn", "akn", "weyl", "linear:0.3"])
@pytest.mark.parametrize("dim", [1, 2])
def test_presets_are_bounded_order_zero(name, dim):
    r = check_admissible(from_spec(name, dim), samples=256)
    assert r.mu_hat == 0 and r.bounded_derivatives
    assert r.mu_hat >= 0
    if r.hadamard_ok:
        assert r.min_jacobian > 0


def test_cubic_growth_is_not_bounded():
    r = check_admissible(from_spec("w + w^3", 1))
    assert not r.bounded_derivatives
    assert r.mu_hat > 0


def test_check_admissible_needs_samples():
    with pytest.raises(ValueError):
        check_admissible(make_preset("kn", 1), samples=10)


def test_taylor_examples():
    t = taylor(from_spec("w/2", 1), 2)
    assert t.exact and t.coefficients == {(1,): (Fraction(1, 2),)} and t.remainder == {}
    t = taylor(from_spec("sin(w)", 1), 3)
    assert t.coefficients[(1,)][0] == pytest.approx(1.0)
    assert t.coefficients[(2,)][0] == pytest.approx(0.0, abs=1e-15)
    t = taylor(make_preset("heisenberg:standard", 3), 3)
    assert t.exact
    nonzero = sorted(c for cs in t.coefficients.values() for c in cs if c != 0)
    assert nonzero == [Fraction(1, 6), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)]
    assert t.coefficients[(1, 1, 0)] == (0, 0, Fraction(1, 6))


@pytest.mark.parametrize("text, dim", [("weyl", 1), ("akn", 2), (NONLINEAR, 1), ("sin(w)", 1),
                                       ("w1/2 + 0.1*sin(w2), w2/2 - 0.1*atan(w1)", 2),
                                       ("heisenberg:standard", 3), ("heisenberg:polarised", 3)])
@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_taylor_reconstruction(text, dim, N):
    tau = from_spec(text, dim)
    pts = np.random.default_rng(7).uniform(-5, 5, size=(300, dim))
    data = taylor(tau, N)
    np.testing.assert_allclose(data.evaluate(pts), tau.evaluate(pts), atol=1e-9)


def test_invert_examples():
    weyl = make_preset("weyl", 1)
    assert invert_tau_x(weyl, [0.0], [1.0])[0] == pytest.approx(2.0, abs=1e-12)
    tau = from_spec(NONLINEAR, 1)
    assert invert_tau_x(tau, [0.4], [0.4])[0] == 0.4
    y = invert_tau_x(tau, [0.0], [0.6])
    assert abs(tau.evaluate(y[None, :])[0, 0] - 0.6) <= 1e-12


@given(st.lists(st.floats(-4, 4), min_size=2, max_size=2), st.floats(-4, 4))
def test_newton_round_trips(xy, w):
    tau = from_spec("w1/2 + 0.1*sin(w2), w2/2 - 0.1*atan(w1)", 2)
    x = np.array(xy)
    target = x + np.array([w, -w / 3])
    y = invert_tau_x(tau, x, target)
    assert np.max(np.abs(x + tau.evaluate((y - x)[None, :])[0] - target)) <= 1e-12
    # forward then inverse
    y0 = x + np.array([w, 0.5])
    fw = x + tau.evaluate((y0 - x)[None, :])[0]
    assert np.max(np.abs(invert_tau_x(tau, x, fw) - y0)) <= 1e-11


def test_batch_inversion_matches_pointwise():
    tau = from_spec(NONLINEAR, 1)
    x = np.linspace(-3, 3, 25)[:, None]
    w = np.linspace(2, -2, 25)[:, None]
    batch = invert_tau_x_batch(tau, x, w)
    single = np.array([invert_tau_x(tau, a, b) for a, b in zip(x, w)])
    np.testing.assert_allclose(batch, single, atol=1e-13)


def test_singular_jacobian_raises():
    with pytest.raises(NewtonError):
        invert_tau_x(from_spec("w^2", 1), [0.0], [-1.0])


def test_quantizing_function_is_immutable():
    tau = make_preset("weyl", 1)
    with pytest.raises(Exception):
        tau.name = "kn"
    assert isinstance(tau, QuantizingFunction)
    assert tau.components[0] is se.parse("w/2")
