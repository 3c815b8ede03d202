from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdsforms.errors import DomainError, ParseError
from tdsforms.expr import (Box, PolyExpr, SmoothMapSpec, as_rational, compose, jacobian, jet_at_zero, parse_expr,
                           values_close)

rationals = st.fractions(min_value=-4, max_value=4, max_denominator=6)


@st.composite
def polys(draw, num_vars=2, max_degree=3):
    terms = draw(st.dictionaries(
        st.tuples(*[st.integers(0, max_degree) for _ in range(num_vars)]), rationals, max_size=5))
    out = PolyExpr.zero(num_vars)
    for exp, c in terms.items():
        mono = PolyExpr.constant(c, num_vars)
        for i, e in enumerate(exp):
            mono = mono * PolyExpr.var(i, num_vars) ** e
        out = out + mono
    return out


def test_partial_of_monomial():
    assert parse_expr("x0^2*x1", 2).partial(0) == parse_expr("2*x0*x1", 2)


def test_jacobian_of_quadratic_map():
    f = SmoothMapSpec.from_strings(["x0^2", "x0*x1"], 2)
    assert jacobian(f, (1, 2)) == [[2, 0], [2, 1]]


def test_parser_precedence_and_unary_minus():
    assert parse_expr("-x0^2", 1).evaluate([3]) == -9
    assert parse_expr("2*x0+3*x1^2", 2).evaluate([1, 2]) == 14
    assert parse_expr("(x0+1)^2", 1) == parse_expr("x0^2+2*x0+1", 1)
    assert parse_expr("3/2*x0", 1).evaluate([2]) == 3


@pytest.mark.parametrize("text", ["x0+", "x9", "1/0", "x0^-1", "2.5*x0", "(x0", "x0 x1"])
def test_parser_rejects_malformed_input(text):
    with pytest.raises(ParseError):
        parse_expr(text, 2)


def test_as_rational_refuses_floats():
    assert as_rational("1/3") == Fraction(1, 3)
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_box_is_open():
    box = Box.cube(2, 1)
    assert not box.contains((1, 0))
    assert box.contains((Fraction(1, 2), 0))


def test_evaluate_outside_domain_raises():
    f = SmoothMapSpec.from_strings(["x0"], 1, domain=Box.cube(1, 1))
    with pytest.raises(DomainError):
        f.evaluate((2,))


def test_black_box_jacobian_is_close():
    f = SmoothMapSpec.black_box(lambda x: (x[0] ** 2,), 1, 1)
    assert abs(jacobian(f, (1.5,))[0][0] - 3) < 1e-8


def test_json_round_trip():
    f = SmoothMapSpec.from_strings(["x0^2 - 1/3*x1", "x0*x1"], 2, domain=Box.cube(2, 2))
    g = SmoothMapSpec.from_json(f.to_json())
    assert g.evaluate((Fraction(1, 2), 1)) == f.evaluate((Fraction(1, 2), 1))
    p = parse_expr("x0^3 - 2/5*x1", 2)
    assert PolyExpr.from_json(p.to_json()) == p


def test_jet_matches_taylor_coefficients():
    f = SmoothMapSpec.from_strings(["1 + 2*x0 + 3*x0^2"], 1)
    jet = jet_at_zero(f, 2)
    assert jet.value == (1,)
    assert values_close(jet.first_derivatives()[0][0], 2)


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), st.tuples(rationals, rationals))
def test_evaluation_is_a_ring_homomorphism(a, b, pt):
    assert (a * b).evaluate(pt) == a.evaluate(pt) * b.evaluate(pt)
    assert (a + b).evaluate(pt) == a.evaluate(pt) + b.evaluate(pt)


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_product_rule(a, b):
    for i in range(2):
        assert (a * b).partial(i) == a.partial(i) * b + a * b.partial(i)


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), polys(), st.tuples(rationals, rationals))
def test_substitution_matches_composition(a, u, v, pt):
    assert a.substitute([u, v]).evaluate(pt) == a.evaluate((u.evaluate(pt), v.evaluate(pt)))


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), st.tuples(rationals, rationals))
def test_compose_chain_rule(a, b, pt):
    f = SmoothMapSpec.polynomial([a, b])
    g = SmoothMapSpec.polynomial([b, a * b])
    fg = compose(f, g)
    jf, jg = jacobian(f, g.evaluate(pt)), jacobian(g, pt)
    chain = [[sum(jf[i][t] * jg[t][j] for t in range(2)) for j in range(2)] for i in range(2)]
    assert jacobian(fg, pt) == chain


@settings(max_examples=60, deadline=None)
@given(polys())
def test_printed_form_reparses(a):
    assert parse_expr(str(a), 2) == a
