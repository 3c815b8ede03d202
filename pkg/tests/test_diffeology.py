from __future__ import annotations

import random
from fractions import Fraction

import pytest

from tdsforms import spaces as S
from tdsforms.diffeology import (SpaceVectorField, check_linear_continuous, equivalent, is_plaque,
                                 joint_plaque_probe, locally_integrable_probe, tangent_class, tangent_space,
                                 weaker_condition_probe)
from tdsforms.errors import BaseMismatch, DimensionError, NotAPlaque
from tdsforms.expr import PolyExpr, SmoothMapSpec, compose

t = PolyExpr.var(0, 1)
ORIGIN2 = (Fraction(0), Fraction(0))


def curve(*components) -> SmoothMapSpec:
    return SmoothMapSpec(list(components), num_vars=1)


class TestLinesPlane:
    lines = S.make_lines_plane()

    def test_straight_lines_are_plaques_and_curves_are_not(self):
        assert is_plaque(self.lines, curve(t, t))[0]
        assert is_plaque(self.lines, curve(t + 1, t * 3 - 2))[0]
        assert not is_plaque(self.lines, curve(t, t * t))[0]

    def test_independent_directions_do_not_join(self):
        p1, p2 = curve(t, PolyExpr.zero(1)), curve(PolyExpr.zero(1), t)
        res = joint_plaque_probe(self.lines, p1, p2, "strong")
        assert not res.found
        assert res.certificate["reason"].startswith("line-direction obstruction")
        assert res.certificate["determinant"] != 0

    def test_parallel_plaques_join(self):
        p1, p2 = curve(t, t * 2), curve(t * 3, t * 6)
        assert joint_plaque_probe(self.lines, p1, p2, "weak").found

    def test_only_the_zero_field_is_integrable(self):
        F = (Fraction(1, 2), Fraction(-1, 3))
        zero = SpaceVectorField(self.lines, [PolyExpr.zero(2), PolyExpr.zero(2)])
        const = SpaceVectorField(self.lines, [PolyExpr.constant(1, 2), PolyExpr.zero(2)])
        assert all(locally_integrable_probe(self.lines, zero, q, (Fraction(0),)).found
                   for q in self.lines.integrability_test_plaques(zero, F))
        assert not all(locally_integrable_probe(self.lines, const, q, (Fraction(0),)).found
                       for q in self.lines.integrability_test_plaques(const, F))

    def test_linear_and_continuous(self):
        assert check_linear_continuous(self.lines, samples=3, rng=random.Random(1)).passed


class TestAxesUnion:
    axes = S.make_axes_union()

    def test_tangent_space_at_origin_is_a_union_of_lines(self):
        ts = tangent_space(self.axes, ORIGIN2)
        assert ts.is_union_of_branches
        assert ts.branches == {"x-axis": 1, "y-axis": 1}

    def test_mixed_curve_is_rejected(self):
        with pytest.raises(NotAPlaque):
            tangent_class(self.axes, curve(t, t * t))

    def test_sum_across_axes_is_not_a_plaque(self):
        p1, p2 = self.axes.realize(ORIGIN2, (1, 0)), self.axes.realize(ORIGIN2, (0, 1))
        assert self.axes.add_plaques(p1, p2) is None
        assert not is_plaque(self.axes, curve(t, t))[0]
        assert not joint_plaque_probe(self.axes, p1, p2).found

    def test_sum_along_one_axis_is_a_plaque(self):
        p1, p2 = self.axes.realize(ORIGIN2, (1, 0)), self.axes.realize(ORIGIN2, (3, 0))
        p12 = self.axes.add_plaques(p1, p2)
        assert tangent_class(self.axes, p12).signature == (4, 0)


class TestEuclidean:
    E = S.make_euclidean(2)

    def test_tangent_class_is_the_velocity(self):
        p = curve(t * 3 + 1, t * t - t)
        assert tangent_class(self.E, p).signature == (3, -1)

    def test_equivalence_orders(self):
        p = curve(t, PolyExpr.zero(1))
        bent = compose(p, curve(t + t * t))
        assert equivalent(self.E, p, bent, order=1)
        assert not equivalent(self.E, p, bent, order=2)
        with pytest.raises(BaseMismatch):
            equivalent(self.E, p, curve(t + 1, PolyExpr.zero(1)))

    def test_joins_and_weaker_condition(self):
        p1, p2 = curve(t, t * t), curve(t * t, t)
        assert joint_plaque_probe(self.E, p1, p2, "weak").found
        assert weaker_condition_probe(self.E, p1, p2).found

    def test_tangent_class_needs_a_curve(self):
        with pytest.raises(DimensionError):
            tangent_class(self.E, SmoothMapSpec(PolyExpr.variables(2), num_vars=2))


class TestMeridianSphere:
    sphere = S.make_sphere_parallels()

    @pytest.mark.parametrize("pole", [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)])
    def test_poles_are_transverse(self, pole):
        a = self.sphere.realize(pole, (1.0, 0.0, 0.0))
        b = self.sphere.realize(pole, (0.0, 1.0, 0.0))
        res = joint_plaque_probe(self.sphere, a, b, "strong")
        assert not res.found
        assert res.certificate["reason"].startswith("meridian-plane obstruction")

    def test_field_vanishing_at_poles_is_integrable(self):
        W = self.sphere.meridian_field(PolyExpr.constant(1, 3))
        F = self.sphere.sample_point(random.Random(4))
        assert all(locally_integrable_probe(self.sphere, W, q, (Fraction(0),)).found
                   for q in self.sphere.integrability_test_plaques(W, F))


class TestTangentPlanes:
    planes = S.make_tangent_planes()

    def test_origin_strong_join_but_no_weak_join(self):
        flat = curve(*self.planes.lift(0, t, PolyExpr.zero(1)))
        curved = curve(*self.planes.lift(1, PolyExpr.zero(1), t))
        assert joint_plaque_probe(self.planes, flat, curved, "strong").found
        assert not joint_plaque_probe(self.planes, flat, curved, "weak").found
