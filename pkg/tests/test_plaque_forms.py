from __future__ import annotations

from fractions import Fraction

import pytest

from tdsforms import spaces as S
from tdsforms.errors import NoPointwisePreimage, NotTangent, TransverseSpaceError
from tdsforms.expr import PolyExpr, SmoothMapSpec
from tdsforms.forms import DifferentialForm
from tdsforms.plaque_forms import (PlaqueIndexedForm, PointwiseForm, algebraic_to_pointwise, compatibility_check,
                                   axes_counterexample, pointwise_to_algebraic, psi, psi_inverse_at,
                                   tangent_condition_check)

t = PolyExpr.var(0, 1)


def curve(*components) -> SmoothMapSpec:
    return SmoothMapSpec(list(components), num_vars=1)


@pytest.fixture
def plane():
    return S.make_euclidean(2)


@pytest.fixture
def area(plane):
    return PointwiseForm.from_differential_form(plane, DifferentialForm(2, 2, {(0, 1): "1 + x0"}))


def test_axes_counterexample_values():
    omega, ev = axes_counterexample()
    assert ev["omega_xi1_at_origin"] == 1
    assert ev["omega_xi1_at_(1,0)"] == 2
    assert ev["xi1_signature_at_origin"] == [0, 0]
    assert ev["pointwise_value_forced"] == 0
    assert not ev["has_pointwise_preimage"]
    with pytest.raises(NoPointwisePreimage):
        algebraic_to_pointwise(omega)


def test_psi_inverse_recovers_pointwise_values(plane, area):
    Omega = psi(plane, area)
    F = (Fraction(1), Fraction(0))
    assert psi_inverse_at(plane, Omega, F, [(1, 0), (0, 1)]) == 2
    assert psi_inverse_at(plane, Omega, F, [(1, 1), (1, -1)]) == -4
    assert psi_inverse_at(plane, Omega, F, [(1, 1), (1, -1)], cross_check=True) == -4


def test_psi_is_module_linear(plane, area):
    f = PolyExpr.variables(2)[1] + 3
    p = SmoothMapSpec(PolyExpr.variables(2), num_vars=2)
    scaled = psi(plane, area).scaled_by(f)(p)
    assert scaled == DifferentialForm(2, 2, {(0, 1): "(1 + x0)*(x1 + 3)"})
    doubled = (psi(plane, area) + psi(plane, area))(p)
    assert doubled == DifferentialForm(2, 2, {(0, 1): "2 + 2*x0"})


def test_psi_refused_on_a_space_with_transverse_points():
    lines = S.make_lines_plane()
    omega = PointwiseForm.from_differential_form(lines, DifferentialForm(2, 1, {(0,): "1"}))
    with pytest.raises(TransverseSpaceError):
        psi(lines, omega)


def test_pullback_collection_passes_compatibility_and_tangent_condition(plane):
    omega = PointwiseForm.from_differential_form(plane, DifferentialForm(2, 1, {(0,): "x1", (1,): "x0^2"}))
    Omega = psi(plane, omega)
    p = curve(t, t * 2)
    phi = curve(t * 3 + t * t)
    assert compatibility_check(Omega, p, phi).passed
    bent = curve(t + t * t, t * 2 - t * t * t)
    res = tangent_condition_check(Omega, p, (0,), bent, (0,), [(1,)])
    assert res.passed


def _second_derivative_rule(p: SmoothMapSpec) -> DifferentialForm:
    # depends on the 2-jet of the plaque, so it is not a pullback of anything
    c = p.components[0].partial(0).partial(0).constant_term
    return DifferentialForm(p.num_vars, 1, {(0,): PolyExpr.constant(c, p.num_vars)})


def test_rule_depending_on_second_jet_fails_both_checks(plane):
    Omega = PlaqueIndexedForm(plane, 1, _second_derivative_rule, name="jet2")
    p, bent = curve(t, PolyExpr.zero(1)), curve(t + t * t, PolyExpr.zero(1))
    res = tangent_condition_check(Omega, p, (0,), bent, (0,), [(1,)])
    assert not res.passed
    assert res.witness["clause"] == "value"
    assert not compatibility_check(Omega, p, curve(t + t * t)).passed


def test_tangent_condition_needs_shared_directions(plane, area):
    Omega = psi(plane, PointwiseForm.from_differential_form(plane, DifferentialForm(2, 1, {(0,): "1"})))
    with pytest.raises(NotTangent):
        tangent_condition_check(Omega, curve(t, PolyExpr.zero(1)), (0,), curve(PolyExpr.zero(1), t), (0,), [(1,)])


def test_pointwise_and_algebraic_views_round_trip(plane, area):
    back = algebraic_to_pointwise(pointwise_to_algebraic(area), check_points=[(0, 0), (1, 2)])
    for F in [(0, 0), (Fraction(1, 2), -3)]:
        assert back.at(F) == area.at(F)
