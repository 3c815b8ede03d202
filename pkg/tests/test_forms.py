from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdsforms.errors import DimensionError, DomainError, MetricError
from tdsforms.expr import Box, PolyExpr, SmoothMapSpec, compose, parse_expr
from tdsforms.forms import DifferentialForm, VectorFieldOnBox, differential_of_function, metric_dual
from tdsforms.verify import random_differential, random_poly_map


def test_wedge_of_one_forms_in_the_plane():
    a = DifferentialForm(2, 1, {(0,): "1", (1,): "1"})
    b = DifferentialForm(2, 1, {(0,): "x1", (1,): "x0"})
    assert a.wedge(b) == DifferentialForm(2, 2, {(0, 1): "x0 - x1"})


def test_pullback_of_area_form_under_squaring_map():
    f = SmoothMapSpec.from_strings(["x0^2 - x1^2", "2*x0*x1"], 2)
    area = DifferentialForm(2, 2, {(0, 1): "1"})
    assert area.pullback(f) == DifferentialForm(2, 2, {(0, 1): "4*x0^2 + 4*x1^2"})


def test_pullback_of_function_is_composition():
    f = SmoothMapSpec.from_strings(["x0 + x1", "x0*x1"], 2)
    g = DifferentialForm.function(parse_expr("x0^2 + x1", 2))
    assert g.pullback(f) == DifferentialForm.function(parse_expr("(x0+x1)^2 + x0*x1", 2))


def test_exterior_derivative_values():
    w = DifferentialForm(2, 1, {(1,): "x0"})
    assert w.d() == DifferentialForm(2, 2, {(0, 1): "1"})
    f = parse_expr("x0^2*x1", 2)
    assert differential_of_function(f) == DifferentialForm(2, 1, {(0,): "2*x0*x1", (1,): "x0^2"})


def test_apply_to_fields():
    area = DifferentialForm(2, 2, {(0, 1): "1"})
    X = VectorFieldOnBox.from_strings(["x1", "1"])
    Y = VectorFieldOnBox.from_strings(["1", "x0"])
    assert area.apply(X, Y) == parse_expr("x0*x1 - 1", 2)


def test_domain_is_enforced():
    w = DifferentialForm(1, 1, {(0,): "x0"}, domain=Box.cube(1, 1))
    with pytest.raises(DomainError):
        w.at((2,))
    assert w.at((0,)).is_zero()


def test_metric_dual_and_errors():
    df = differential_of_function(parse_expr("x0^2 + 3*x1", 2))
    assert metric_dual(df, [[1, 0], [0, 1]]) == VectorFieldOnBox.from_strings(["2*x0", "3"])
    assert metric_dual(df, [[2, 0], [0, 3]]) == VectorFieldOnBox.from_strings(["x0", "1"])
    with pytest.raises(MetricError):
        metric_dual(df, [[1, 2], [0, 1]])
    with pytest.raises(MetricError):
        metric_dual(df, [[1, 0], [0, -1]])
    with pytest.raises(DimensionError):
        metric_dual(df, [[1]])


def test_json_round_trip():
    w = DifferentialForm(3, 2, {(0, 2): "x1^2 - 1/3", (1, 2): "x0"}, domain=Box.cube(3, 2))
    assert DifferentialForm.from_json(w.to_json()) == w


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_d_squared_and_leibniz(seed):
    rng = random.Random(seed)
    dim = rng.randint(1, 4)
    ka, kb = rng.randint(0, dim), rng.randint(0, dim)
    a, b = random_differential(rng, dim, ka), random_differential(rng, dim, kb)
    assert a.d().d().is_zero()
    assert a.wedge(b).d() == a.d().wedge(b) + a.wedge(b.d()) * (-1) ** ka


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_pullback_commutes_with_d_and_composition(seed):
    rng = random.Random(seed)
    dim, n1, n2 = rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 3)
    f, g = random_poly_map(rng, n1, dim), random_poly_map(rng, n2, n1)
    w = random_differential(rng, dim, rng.randint(0, min(dim, n1, n2)), coeff_degree=2)
    assert w.pullback(f).d() == w.d().pullback(f)
    assert w.pullback(compose(f, g)) == w.pullback(f).pullback(g)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_pointwise_evaluation_matches_field_application(seed):
    rng = random.Random(seed)
    dim = rng.randint(1, 3)
    k = rng.randint(0, dim)
    w = random_differential(rng, dim, k, coeff_degree=2)
    fields = [VectorFieldOnBox([PolyExpr.constant(rng.randint(-3, 3), dim) + PolyExpr.var(j, dim) * rng.randint(-2, 2)
                                for j in range(dim)]) for _ in range(k)]
    pt = tuple(rng.randint(-3, 3) for _ in range(dim))
    assert w.apply(*fields).evaluate(pt) == w.at(pt).evaluate(*[X(pt) for X in fields])
