from __future__ import annotations

import random
from fractions import Fraction

import pytest

from tdsforms import spaces as S
from tdsforms.diffeology import SpaceVectorField
from tdsforms.errors import DomainError, FixtureError, IncompatibleCollection, SchemaError
from tdsforms.exterior import ExteriorForm
from tdsforms.expr import Box, PolyExpr
from tdsforms.forms import DifferentialForm, VectorFieldOnBox
from tdsforms.plaque_forms import PointwiseForm


@pytest.mark.parametrize("name", ["euclidean:1", "euclidean:3", "axes", "lines", "sphere_parallels",
                                  "tangent_planes", "atlas:plane2", "atlas:circle2", "atlas:sphere2"])
def test_fixtures_resolve(name):
    space = S.get_fixture(name)
    assert space.membership(space.sample_point(random.Random(0))) is not None


def test_unknown_fixture_and_bad_json():
    with pytest.raises(FixtureError):
        S.get_fixture("torus")
    with pytest.raises(FixtureError):
        S.get_fixture("euclidean:x")
    with pytest.raises(SchemaError):
        S.space_from_json({"kind": "lines", "ambient": 3})
    with pytest.raises(SchemaError):
        S.space_from_json({"ambient": 2})
    assert S.space_from_json({"kind": "euclidean", "ambient": 2}).ambient_dim == 2


def test_attested_non_transverse_fixtures():
    assert S.get_fixture("euclidean:2").non_transverse
    assert S.get_fixture("tangent_planes").non_transverse
    assert S.get_fixture("atlas:plane2").non_transverse
    assert not S.get_fixture("lines").non_transverse


@pytest.mark.parametrize("name", ["plane2", "circle2", "sphere2"])
def test_atlas_transitions_are_coherent(name):
    atlas = S.make_atlas_space(name).atlas
    assert atlas.coherence_check(samples=6, rng=random.Random(2)).passed


def _round_trip(name: str, degree: int):
    space = S.make_atlas_space(name)
    rng = random.Random(5)
    ambient = DifferentialForm(space.ambient_dim, degree,
                               {tuple(range(degree)): "1 + x0*x1", tuple(range(1, degree + 1)): "x0"})
    W = PointwiseForm.from_differential_form(space, ambient)
    coll = S.chart_collection_from_pointwise(space, W)
    back = S.pointwise_from_chart_collection(space, coll, samples=6, rng=rng)
    sec = S.section_from_pointwise(space, W)
    back2 = S.pointwise_from_section(space, sec, samples=6, rng=rng)
    pts = [space.atlas.sample_point(rng) for _ in range(5)]
    return space, W, coll, back, back2, pts


def test_plane_atlas_round_trip_is_exact():
    space, W, coll, back, back2, pts = _round_trip("plane2", 1)
    for F in pts:
        assert S.forms_agree_on_manifold(space, back, W, F, 0.0)
        assert S.forms_agree_on_manifold(space, back2, W, F, 0.0)
    assert S.chart_independence_check(space, coll, pts).passed


def test_sphere_atlas_round_trip_within_tolerance():
    space, W, coll, back, back2, pts = _round_trip("sphere2", 2)
    for F in pts:
        assert S.forms_agree_on_manifold(space, back, W, F, 1e-9)
        assert S.forms_agree_on_manifold(space, back2, W, F, 1e-9)


def test_corrupted_chart_collection_is_refused():
    space, _W, coll, *_ = _round_trip("plane2", 1)
    delta = DifferentialForm(2, 1, {(0,): PolyExpr.constant(1, 2)})
    with pytest.raises(IncompatibleCollection):
        S.pointwise_from_chart_collection(space, coll.corrupted(1, delta), samples=6, rng=random.Random(0))
    space, _W, coll, *_ = _round_trip("circle2", 1)
    with pytest.raises(IncompatibleCollection):
        S.pointwise_from_chart_collection(space, coll.corrupted(1, ExteriorForm(1, 1, {(0,): 1e-3})), samples=6,
                                          rng=random.Random(0))


def test_bump_extension_keeps_local_values():
    local = VectorFieldOnBox.from_strings(["x1 + 1", "x0^2"], Box.cube(2, 2))
    ext = S.bump_extension(local, (0, 0), Fraction(1, 4), Fraction(1, 2))
    assert ext((Fraction(1, 8), 0)) == local(Fraction(1, 8), 0)
    assert all(v == 0 for v in ext((1, 0)))
    w = DifferentialForm(2, 1, {(0,): "x0", (1,): "1"})
    assert S.extended_form_value(w, [ext], (Fraction(1, 8), 0)) == w.at((Fraction(1, 8), 0)).evaluate(
        local(Fraction(1, 8), 0))
    with pytest.raises(DomainError):
        S.bump_extension(local, (0, 0), Fraction(1, 2), 3)
    with pytest.raises(DomainError):
        S.bump_extension(local, (0, 0), Fraction(1, 2), Fraction(1, 4))


def test_axes_field_decomposition():
    axes = S.make_axes_union()
    x, y = PolyExpr.variables(2)
    xi1, xi2 = axes.field_basis()
    field = SpaceVectorField(axes, [x * x * 3, y * (y + 1)])
    h1, h2 = axes.decompose_field(field)
    for F in [(Fraction(2), Fraction(0)), (Fraction(0), Fraction(-3))]:
        rebuilt = [h1.evaluate(F) * a + h2.evaluate(F) * b for a, b in zip(xi1.velocity(F), xi2.velocity(F))]
        assert rebuilt == list(field.velocity(F))
