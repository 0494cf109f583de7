import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tauquant import symexpr as se

# ---------------------------------------------------------------------------
# random expression text


_leaf = st.one_of(
    st.sampled_from(["x", "y", "k", "pi", "e"]),
    st.integers(0, 9).map(str),
    st.floats(0.05, 5.0, allow_nan=False).map(lambda v: f"{v:.3f}"),
)


def _extend(children):
    unary = st.tuples(st.sampled_from(["sin", "cos", "exp", "atan", "tanh", "jb", "-"]), children)
    binary = st.tuples(st.sampled_from(["+", "-", "*", "/"]), children, children)
    power = st.tuples(children, st.sampled_from(["2", "3", "0.5"]))
    return st.one_of(
        unary.map(lambda t: f"-({t[1]})" if t[0] == "-" else f"{t[0]}({t[1]})"),
        binary.map(lambda t: f"({t[1]}) {t[0]} ({t[2]})"),
        power.map(lambda t: f"({t[0]})^{t[1]}"),
    )


expr_text = st.recursive(_leaf, _extend, max_leaves=12)
smooth_text = st.recursive(
    st.one_of(st.sampled_from(["x", "k"]), st.integers(1, 5).map(str)),
    lambda c: st.one_of(
        st.tuples(st.sampled_from(["sin", "cos", "atan", "tanh", "jb"]), c).map(lambda t: f"{t[0]}({t[1]})"),
        st.tuples(st.sampled_from(["+", "-", "*"]), c, c).map(lambda t: f"({t[1]}) {t[0]} ({t[2]})"),
        st.tuples(c).map(lambda t: f"({t[0]})/(2 + ({t[0]})^2)"),
    ),
    max_leaves=8,
)


# ---------------------------------------------------------------------------
# parsing and printing


def test_parse_structure_matches_grammar():
    e = se.parse("x + 2*k^2")
    expected = se.add(se.var("x"), se.mul(se.const(2.0), se.power(se.var("k"), se.const(2.0))))
    assert e is expected
    assert e.kind == "add"
    assert e.args[1].kind == "mul" and e.args[1].args[1].kind == "pow"


def test_parse_examples_evaluate():
    assert se.evaluate(se.parse("jb(k)"), {"k": 0.0}) == 1.0
    assert se.evaluate(se.parse("sin(x)*cos(k)"), {"x": math.pi / 2, "k": 0.0}) == 1.0
    assert se.evaluate(se.parse("k^2"), {"k": 3.0}) == 9.0
    assert se.evaluate(se.parse("jb(k1,k2)"), {"k1": 0.0, "k2": 0.0}) == 1.0
    assert se.evaluate(se.parse("exp(x)-1"), {"x": 0.0}) == 0.0


def test_precedence_rules():
    # unary minus binds tighter than ^, and ^ is right-associative
    assert se.evaluate(se.parse("-x^2"), {"x": 3.0}) == 9.0
    assert se.evaluate(se.parse("-(x^2)"), {"x": 3.0}) == -9.0
    assert se.evaluate(se.parse("2^3^2"), {}) == 2.0**9
    assert se.evaluate(se.parse("1 - 2 - 3"), {}) == -4.0
    assert se.evaluate(se.parse("8/4/2"), {}) == 1.0
    assert se.evaluate(se.parse("2.5e-1*4"), {}) == 1.0
    assert se.evaluate(se.parse("pi"), {}) == math.pi


@pytest.mark.parametrize("text, offset", [("x +", 3), ("(x", 2), ("x $ 2", 2), ("2 3", 2)])
def test_syntax_errors_carry_offset(text, offset):
    with pytest.raises(se.ParseError) as info:
        se.parse(text)
    assert info.value.offset == offset


def test_unknown_function_rejected():
    with pytest.raises(se.ParseError):
        se.parse("foo(x)")


def test_unknown_variable_allowed_until_evaluation():
    e = se.parse("zeta + 1")
    with pytest.raises(se.UnboundVariableError):
        se.evaluate(e, {})


@given(expr_text)
def test_parse_print_parse_idempotent(text):
    e = se.parse(text)
    assert se.parse(se.to_text(e)) is e


@given(expr_text)
def test_interned_nodes_are_shared(text):
    assert se.parse(text) is se.parse(text)


# ---------------------------------------------------------------------------
# evaluation


def test_domain_errors():
    with pytest.raises(se.DomainError):
        se.evaluate(se.parse("log(x)"), {"x": 0.0})
    with pytest.raises(se.DomainError):
        se.evaluate(se.parse("sqrt(x)"), {"x": -1.0})
    with pytest.raises(se.DomainError):
        se.evaluate(se.parse("1/x"), {"x": 0.0})
    with pytest.raises(se.DomainError):
        se.evaluate(se.parse("x^0.5"), {"x": -2.0})


def test_array_evaluation_broadcasts():
    e = se.parse("x*k")
    out = se.evaluate(e, {"x": np.arange(3.0)[:, None], "k": np.arange(4.0)[None, :]})
    assert out.shape == (3, 4)
    assert out[2, 3] == 6.0


def test_ramp_is_smooth_step():
    e = se.parse("ramp(x)")
    vals = se.evaluate(e, {"x": np.array([-1.0, 0.0, 0.5, 1.0, 2.0])})
    np.testing.assert_allclose(vals, [0.0, 0.0, 0.5, 1.0, 1.0])


# ---------------------------------------------------------------------------
# differentiation


def test_diff_examples():
    assert se.diff(se.parse("k^2"), "k") is se.parse("2*k")
    d = se.diff(se.parse("jb(x)"), "x")
    for v in (-2.0, 0.0, 0.7, 3.0):
        assert se.evaluate(d, {"x": v}) == pytest.approx(v / math.sqrt(1 + v * v), rel=1e-15)
    assert se.diff(se.parse("sin(x)"), "k") is se.const(0.0)


def test_non_constant_exponent_rejected():
    with pytest.raises(se.ParseError):
        se.parse("x^k")


def test_non_integer_power_derivative():
    d = se.diff(se.parse("jb(k)^0.5"), "k")
    k = 1.3
    expected = 0.5 * (1 + k * k) ** (-0.75) * k
    assert se.evaluate(d, {"k": k}) == pytest.approx(expected, rel=1e-13)


@given(smooth_text, st.sampled_from(["x", "k"]), st.integers(0, 2**31 - 1))
def test_diff_matches_central_difference(text, v, seed):
    e = se.parse(text)
    d = se.diff(e, v)
    d3 = se.diff(se.diff(d, v), v)
    pts = np.random.default_rng(seed).uniform(-2.0, 2.0, size=(100, 2))
    h = 1e-5
    for x, k in pts:
        b = {"x": x, "k": k}
        # skip points where the truncation error bound is not below tolerance
        scale = max(1.0, abs(se.evaluate(d, b)))
        assume_ok = abs(se.evaluate(d3, b)) * h * h / 6 < 1e-7 * scale
        if not assume_ok:
            continue
        plus, minus = dict(b), dict(b)
        plus[v] += h
        minus[v] -= h
        fd = (se.evaluate(e, plus) - se.evaluate(e, minus)) / (2 * h)
        fd_noise = 1e-16 * max(abs(se.evaluate(e, plus)), 1.0) / h
        assert abs(fd - se.evaluate(d, b)) <= 1e-6 * scale + 10 * fd_noise


def test_ramp_derivatives_chain():
    e = se.parse("ramp(2*x)")
    d = se.diff(e, "x")
    assert se.evaluate(d, {"x": 0.25}) == pytest.approx(2 * 6 * 0.5 * 0.5)
    assert se.evaluate(se.diff(d, "x"), {"x": 0.25}) == pytest.approx(4 * (6 - 12 * 0.5))


# ---------------------------------------------------------------------------
# substitution


def test_substitute_examples():
    w = se.substitute(se.parse("x*k"), {"x": se.parse("x + (y-x)/2")})
    assert w is se.parse("(x + (y-x)/2)*k")
    z = se.substitute(se.parse("sin(x)"), {"x": se.parse("0")})
    assert se.evaluate(z, {}) == 0.0
    a = se.substitute(se.parse("jb(k)"), {"x": se.parse("x + 0*(y - x)")})
    assert se.free_vars(a) == {"k"}


@given(smooth_text, smooth_text, st.floats(-2, 2), st.floats(-2, 2))
def test_substitute_then_evaluate_equals_composed_binding(outer, inner, x, k):
    e, s = se.parse(outer), se.parse(inner)
    composed = se.substitute(e, {"x": s})
    direct = se.evaluate(e, {"x": se.evaluate(s, {"x": x, "k": k}), "k": k})
    got = se.evaluate(composed, {"x": x, "k": k})
    assert got == pytest.approx(direct, rel=1e-12, abs=1e-12)


def test_substitution_is_simultaneous():
    e = se.substitute(se.parse("x - y"), {"x": se.var("y"), "y": se.var("x")})
    assert e is se.parse("y - x")


# ---------------------------------------------------------------------------
# growth, polynomials, naming


def test_growth_guard():
    e = se.var("x")
    for i in range(40):
        e = se.add(se.mul(e, se.const(float(i + 2))), se.var(f"x{i % 9 + 1}"))
    with pytest.raises(se.ExpressionGrowthError):
        se.check_growth(e, limit=50)
    assert se.check_growth(e) is e


def test_brief_text_for_huge_expressions():
    e = se.var("x")
    for _ in range(40):
        e = se.mul(se.add(e, se.const(1.0)), se.add(e, se.const(2.0)))
    assert se.node_count(e) < 200
    assert se.brief_text(e).startswith("<expression")
    assert se.evaluate(e, {"x": -1.0}) is not None


def test_polynomial_round_trip():
    e = se.parse("w1/2 + w1*w2/6 - 3*w2^2")
    p = se.to_polynomial(e, ["w1", "w2"])
    from fractions import Fraction

    assert p == {(1, 0): Fraction(1, 2), (1, 1): Fraction(1, 6), (0, 2): Fraction(-3)}
    back = se.from_polynomial(p, ["w1", "w2"])
    b = {"w1": 0.3, "w2": -1.7}
    assert se.evaluate(back, b) == pytest.approx(se.evaluate(e, b), rel=1e-14)
    assert se.to_polynomial(se.parse("sin(w1)"), ["w1"]) is None


def test_canonical_names_in_one_dimension():
    e = se.canonical_names(se.parse("x1*k1 + y1"), 1)
    assert e is se.parse("x*k + y")
