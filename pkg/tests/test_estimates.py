import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tauquant.discretize import Grid
from tauquant.estimates import (NonConvergenceError, cv_bound, ellipticity, frequency_basis,
                                garding_check, operator_defect, operator_norm, probe_defect)
from tauquant.quantize import op_symbol

from conftest import sym


def test_norm_examples():
    assert operator_norm(np.eye(6)).norm == pytest.approx(1.0, rel=1e-12)
    assert operator_norm(2 * np.eye(6), "full-decomposition").norm == pytest.approx(2.0)
    assert operator_norm(np.zeros((4, 4))).norm == 0.0
    with pytest.raises(ValueError):
        operator_norm(np.ones((3, 4)))
    with pytest.raises(ValueError):
        operator_norm(np.eye(3), "lanczos")


@given(st.integers(0, 2**31 - 1), st.integers(2, 30))
def test_power_iteration_matches_svd(seed, size):
    r = np.random.default_rng(seed)
    A = r.standard_normal((size, size)) + 1j * r.standard_normal((size, size))
    p = operator_norm(A)
    assert p.residual <= 1e-8
    assert p.norm == pytest.approx(np.linalg.svd(A, compute_uv=False)[0], rel=1e-7)
    assert operator_norm(A.conj().T).norm == pytest.approx(p.norm, rel=1e-10)


def test_power_iteration_reports_stall():
    # two equal top singular values with opposite phases stall the iteration
    A = np.diag([1.0, -1.0 + 1e-13, 0.5])
    with pytest.raises(NonConvergenceError):
        operator_norm(A, tol=1e-16, max_iter=50)


def test_defect_measures(grid128):
    A = np.eye(128)
    assert operator_defect(A, A) == 0.0
    assert operator_defect(A, 2 * A) == pytest.approx(1.0)
    assert probe_defect(A, 0.5 * A, grid128) == pytest.approx(0.5, abs=1e-3)


def test_frequency_basis_is_unitary(grid64):
    F = frequency_basis(grid64)
    assert np.max(np.abs(F.conj().T @ F - np.eye(64))) <= 1e-12


def test_cv_examples():
    assert cv_bound(sym("1")).M_val == 1.0
    r = cv_bound(sym("sin(x)*sin(y)*sin(k)"), 1, box=(math.pi, math.pi, math.pi))
    assert r.M_val == pytest.approx(1.0, abs=1e-3)
    assert r.M_val == max(r.table.values())
    assert len(r.table) == 4**3
    assert json.loads(json.dumps(r.to_json()))["cv"]["M_val"] == r.M_val


@given(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_cv_homogeneity(c):
    a = sym("cos(x - y)*exp(-((k/3)^2))", "sin(x)*atan(k)")
    base = cv_bound(a, samples=256).M_val
    scaled = cv_bound(a.scale(c), samples=256).M_val
    assert scaled == pytest.approx(abs(c) * base, rel=1e-14)


def test_cv_with_tau_reports_tau_sups(nonlinear_tau):
    r = cv_bound(sigma=sym("cos(x)*jb(k)^-1"), tau=nonlinear_tau, samples=256)
    assert len(r.tau_sups) == 6
    assert r.tau_sups["0:(1,)"] == pytest.approx(0.6, abs=1e-3)
    with pytest.raises(ValueError):
        cv_bound()


def test_ellipticity_examples():
    assert ellipticity(sym("1+k^2"), 2) == pytest.approx(0.5, abs=1e-3)
    assert ellipticity(sym("jb(k)^2"), 2) == pytest.approx(0.5, abs=1e-3)
    assert ellipticity(sym("sin(x)"), 0) is None
    assert ellipticity(sym("k"), 1) is None
    assert ellipticity(sym("k"), 1, R0=1.0) == pytest.approx(0.5, abs=1e-3)


def test_garding_examples(presets):
    g = Grid(1, 64, math.pi)
    r = garding_check(sym("1"), presets["kn"], 0, -1, g)
    assert r.C1 == pytest.approx(0.5) and r.C2 == 0.0 and r.verified
    r = garding_check(sym("1+k^2"), presets["weyl"], 1, 0, g)
    assert r.C1 >= 0.25 and r.C2 <= 1.0 and r.verified
    with pytest.raises(ValueError):
        garding_check(sym("1"), presets["kn"], 0, 0, g)


def test_garding_variable_coefficient(presets, grid128):
    r = garding_check(sym("(2+sin(x))*(1+k^2)"), presets["weyl"], 1, 0, grid128)
    assert r.ok and r.C1 >= 0.1 and r.verified
    assert json.loads(json.dumps(r.to_json()))["garding"]["C1"] == r.C1


def test_garding_multipliers_need_no_shift(presets, grid64):
    for text, c in [("2*(1+k^2)", 2.0), ("jb(k)^2 + 3", 1.0)]:
        r = garding_check(sym(text), presets["weyl"], 1, 0, grid64)
        assert r.C1 >= c / 2 - 1e-12 and r.C2 == 0.0


def test_garding_failure_is_reported(presets, grid64):
    r = garding_check(sym("-(1+k^2)"), presets["weyl"], 1, 0, grid64, R=0.0)
    assert not r.ok and not r.verified


def test_norm_of_quantized_multiplier(presets, grid64):
    A = op_symbol(sym("2 + cos(k)"), presets["kn"], grid64)
    assert operator_norm(A).norm == pytest.approx(3.0, rel=1e-10)
