import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hamgeom.expr import (
    DomainError,
    Expression,
    NotPolynomialError,
    ParseError,
    Polynomial,
    UnboundNameError,
    UnknownIdentifierError,
    evaluate,
    gradient,
    parse,
    poly_partial,
)
from hamgeom.expr.nodes import Binary, Coord, Unary, render

from conftest import expression_corpus, random_points

XYZ = ["x", "y", "z"]


# -- parsing -------------------------------------------------------------------


def test_product_node_and_free_coordinates():
    e = parse("q1*p1", ["q1", "p1"])
    assert isinstance(e.root, Binary) and e.root.op == "*"
    assert e.free_coordinates == ("q1", "p1")


def test_hamiltonian_with_parameter():
    e = parse("p^2/2 + w^2*q^2/2", ["q", "p"], {"w"})
    assert e.free_parameters == frozenset({"w"})
    assert evaluate(e, [1.0, 0.0], {"w": 2.0}) == 2.0


def test_unbalanced_paren_reports_end_of_input():
    with pytest.raises(ParseError) as info:
        parse("sin(theta", ["theta"])
    assert info.value.offset == len("sin(theta")


def test_unknown_identifier_named():
    with pytest.raises(UnknownIdentifierError) as info:
        parse("x + foo", ["x"])
    assert info.value.name == "foo"
    assert info.value.offset == 4


@pytest.mark.parametrize("text", ["", "x +", "x * * y", "(x", "x)", "2 3", "sin x", "x $ y"])
def test_syntax_errors(text):
    with pytest.raises(ParseError):
        parse(text, ["x", "y"])


def test_overlapping_names_rejected():
    with pytest.raises(ValueError):
        parse("x", ["x"], {"x"})
    with pytest.raises(ValueError):
        parse("x", ["x", "x"])


@pytest.mark.parametrize(
    "text,expected",
    [
        ("2^3^2", 2.0**9),  # right associative
        ("-2^2", -4.0),  # power binds tighter than unary minus
        ("8/4/2", 1.0),  # left associative
        ("1 - 2 - 3", -4.0),
        ("2*3 + 4", 10.0),
        ("2*(3 + 4)", 14.0),
        ("2^-1", 0.5),
        ("2**3", 8.0),
    ],
)
def test_precedence(text, expected):
    assert evaluate(parse(text, []), []) == expected


def test_function_aliases_and_pi():
    assert evaluate(parse("atan(1)*4", []), []) == pytest.approx(math.pi)
    assert evaluate(parse("ln(exp(2))", []), []) == pytest.approx(2.0)
    assert evaluate(parse("cos(pi)", []), []) == -1.0


# -- evaluation ----------------------------------------------------------------


def test_eval_examples():
    assert evaluate(parse("4*x*y + z^2", XYZ), [1, 2, 3]) == 17.0
    assert evaluate(parse("cos(theta)", ["theta"]), [0.0]) == 1.0


def test_eval_accepts_mapping():
    e = parse("4*x*y + z^2", XYZ)
    assert e({"x": 1, "y": 2, "z": 3}) == 17.0


@pytest.mark.parametrize("text,x", [("log(x)", 0.0), ("log(x)", -1.0), ("1/x", 0.0), ("sqrt(x)", -1.0), ("x^0.5", -4.0)])
def test_domain_errors(text, x):
    with pytest.raises(DomainError) as info:
        evaluate(parse(text, ["x"]), [x])
    assert info.value.node


def test_gradient_domain_error_propagates():
    with pytest.raises(DomainError):
        gradient(parse("sqrt(x)", ["x"]), [0.0])


def test_unbound_names():
    e = parse("w*x", ["x"], {"w"})
    with pytest.raises(UnboundNameError):
        evaluate(e, [1.0])
    with pytest.raises(UnboundNameError):
        e({"y": 1.0}, {"w": 1.0})


def test_wrong_point_length():
    with pytest.raises(ValueError):
        evaluate(parse("x", XYZ), [1.0, 2.0])


# -- gradients -----------------------------------------------------------------


def test_gradient_examples():
    np.testing.assert_array_equal(gradient(parse("x*y", ["x", "y"]), [2, 3]), [3, 2])
    np.testing.assert_array_equal(gradient(parse("4*x*y + z^2", XYZ), [1, 2, 3]), [8, 4, 6])


def test_gradient_in_chart_order():
    e = parse("y^2", XYZ)
    np.testing.assert_array_equal(gradient(e, [1.0, 3.0, 5.0]), [0.0, 6.0, 0.0])


def _central_difference(e, params, x, step=1e-6):
    out = np.zeros(len(x))
    for i in range(len(x)):
        up, dn = np.array(x, float), np.array(x, float)
        up[i] += step
        dn[i] -= step
        out[i] = (e.evaluate(up, params) - e.evaluate(dn, params)) / (2 * step)
    return out


@pytest.mark.parametrize("label,e,params,box", expression_corpus(), ids=lambda v: v if isinstance(v, str) else "")
def test_gradient_matches_central_differences(label, e, params, box):
    rng = np.random.default_rng(7)
    for x in random_points(rng, box, 100):
        ad = e.gradient(x, params)
        fd = _central_difference(e, params, x)
        assert np.all(np.abs(ad - fd) <= 1e-6 * np.maximum(1.0, np.abs(fd))), (label, x, ad, fd)


def test_gradient_linearity_exact():
    f = parse("sin(x)*y + z^3", XYZ)
    g = parse("exp(x - y)*z", XYZ)
    combo = Expression(Binary("+", Binary("*", parse("2.5", XYZ).root, f.root), Binary("*", parse("-1.25", XYZ).root, g.root)), XYZ)
    rng = np.random.default_rng(3)
    for x in random_points(rng, [(-2, 2)] * 3, 50):
        lhs = combo.gradient(x)
        rhs = 2.5 * f.gradient(x) + -1.25 * g.gradient(x)
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


def _random_poly_text(rng, names, degree=4, terms=5):
    parts = []
    for _ in range(terms):
        c = rng.integers(-5, 6)
        powers = rng.integers(0, degree + 1, len(names))
        while powers.sum() > degree:
            powers[rng.integers(len(names))] -= 1
        mono = "*".join(f"{n}^{int(k)}" for n, k in zip(names, powers) if k)
        parts.append(f"({c})" + (f"*{mono}" if mono else ""))
    return " + ".join(parts)


def test_product_rule_on_random_polynomials():
    rng = np.random.default_rng(11)
    for _ in range(20):
        f = parse(_random_poly_text(rng, XYZ), XYZ)
        g = parse(_random_poly_text(rng, XYZ), XYZ)
        fg = Expression(Binary("*", f.root, g.root), XYZ)
        for x in random_points(rng, [(-2, 2)] * 3, 10):
            lhs = fg.gradient(x)
            rhs = f(x) * g.gradient(x) + g(x) * f.gradient(x)
            np.testing.assert_allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


# -- render / parse round trip -----------------------------------------------------


@pytest.mark.parametrize("label,e,params,box", expression_corpus(), ids=lambda v: v if isinstance(v, str) else "")
def test_render_round_trip_bit_identical(label, e, params, box):
    again = Expression.parse(e.render(), e.coordinates, e.parameters)
    assert again.root == e.root
    rng = np.random.default_rng(5)
    for x in random_points(rng, box, 100):
        try:
            v = e.evaluate(x, params)
        except DomainError:
            continue
        assert again.evaluate(x, params) == v


_leaf = st.one_of(
    st.sampled_from(["x", "y", "z"]),
    st.floats(min_value=-10, max_value=10, allow_nan=False).map(repr),
    st.integers(min_value=0, max_value=5).map(str),
)


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*", "/", "^"]), children).map(lambda t: f"({t[0]}){t[1]}({t[2]})"),
        st.tuples(st.sampled_from(["sin", "cos", "arctan", "exp", "-"]), children).map(lambda t: f"{t[0]}({t[1]})"),
    )


@settings(max_examples=200, deadline=None)
@given(st.recursive(_leaf, _combine, max_leaves=8))
def test_render_round_trip_property(text):
    e = parse(text, XYZ)
    again = parse(e.render(), XYZ)
    assert again.root == e.root


# -- polynomials -----------------------------------------------------------------


def _poly(text, names=XYZ):
    return parse(text, names).to_polynomial()


def test_poly_partial_examples():
    assert poly_partial(_poly("4*x*y + z^2"), 2) == _poly("2*z")
    assert poly_partial(_poly("5"), 0).is_zero()
    assert poly_partial(_poly("x^2*y^3"), 1) == _poly("3*x^2*y^2")


def test_zero_coefficients_not_stored():
    p = _poly("x*y - y*x + 3")
    assert list(p.terms) == [(0, 0, 0)]


def test_non_polynomial_rejected():
    with pytest.raises(NotPolynomialError):
        _poly("sin(x)")
    with pytest.raises(NotPolynomialError):
        _poly("1/x")
    with pytest.raises(NotPolynomialError):
        _poly("x^0.5")


def test_polynomial_matches_evaluation():
    e = parse("a*(x + 2*y)^3 - z/4", XYZ, {"a"})
    p = e.to_polynomial({"a": 0.75})
    rng = np.random.default_rng(2)
    for x in random_points(rng, [(-2, 2)] * 3, 20):
        assert p(x) == pytest.approx(e(x, {"a": 0.75}), rel=1e-13, abs=1e-13)


_exponents = st.tuples(*[st.integers(0, 3)] * 3)
_polys = st.dictionaries(_exponents, st.fractions(min_value=-5, max_value=5, max_denominator=7), max_size=6).map(
    lambda d: Polynomial(3, d)
)


@settings(max_examples=100, deadline=None)
@given(_polys, st.integers(0, 2), st.integers(0, 2))
def test_partials_commute(p, i, j):
    assert poly_partial(poly_partial(p, i), j) == poly_partial(poly_partial(p, j), i)


@settings(max_examples=100, deadline=None)
@given(_polys, _polys, st.integers(0, 2))
def test_polynomial_product_rule_exact(p, q, i):
    assert (p * q).partial(i) == p.partial(i) * q + p * q.partial(i)


@settings(max_examples=100, deadline=None)
@given(_polys, _polys)
def test_polynomial_ring_laws(p, q):
    assert p + q == q + p
    assert (p - p).is_zero()
    assert p * q == q * p


def test_unary_node_for_negation():
    e = parse("-x", ["x"])
    assert isinstance(e.root, Unary) and e.root.op == "neg"
    assert render(Coord("x", 0)) == "x"
