"""Fixture spaces and manifold atlases.

Diffeological fixtures (all with coordinate generators):

* ``euclidean:N`` -- R^N with every polynomial map as a plaque.
* ``axes`` -- the union of the coordinate axes in R^2; plaques stay on one axis.
* ``lines`` -- R^2 where plaques are maps whose image lies in a line.
* ``sphere_parallels`` -- the unit sphere where plaques trace arcs of great
  circles through the poles (black-box plaques parameterized by angle).
* ``tangent_planes`` -- the sheets ``z = 0`` and ``z = x^2 + y^2`` of R^3,
  tangent at the origin; plaques stay on one sheet.

Atlas fixtures (``atlas:plane2``, ``atlas:circle2``, ``atlas:sphere2``)
carry charts, the chart-wise and bundle-section views of a form, and the
converters between them.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .diffeology import (DiffSpace, SpaceVectorField, CheckReport, embed_polynomial, fix_arguments,
                         independent_rows, points_close, random_poly, random_rational, rank,
                         sample_domain_points, signature_matrix, tangent_class)
from .errors import (DimensionError, DomainError, FixtureError, IncompatibleCollection, NotATangentVector,
                     SchemaError)
from .expr import Box, PolyExpr, SmoothMapSpec, compose, jacobian, jacobian_at_zero, values_close
from .exterior import ExteriorForm, det, multi_index_basis
from .forms import DifferentialForm, VectorFieldOnBox
from .plaque_forms import NumericForm, PointwiseForm

TOL = 1e-9


def _zero(v, tol: float = TOL) -> bool:
    return abs(v) <= tol if isinstance(v, float) else v == 0


def _cross2(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _sample_images(m: SmoothMapSpec, count: int = 9) -> list[tuple]:
    out = []
    for r in sample_domain_points(m.domain, m.num_vars, count=count):
        try:
            out.append(m.evaluate(r))
        except DomainError:
            continue
    return out


def coordinate_fields(space: DiffSpace) -> list[SpaceVectorField]:
    n = space.ambient_dim
    return [SpaceVectorField(space, [PolyExpr.constant(int(i == j), n) for j in range(n)], name=f"d{i}")
            for i in range(n)]


class EuclideanSpace(DiffSpace):
    kind = "euclidean"
    non_transverse = True

    def __init__(self, n: int):
        super().__init__(n, name=f"euclidean:{n}")

    def field_basis(self) -> list[SpaceVectorField]:
        return coordinate_fields(self)

    def decompose_field(self, xi: SpaceVectorField) -> list[PolyExpr]:
        return list(xi.components)


class AxesUnion(DiffSpace):
    """The union of the two coordinate axes of R^2."""

    kind = "axes"

    def __init__(self):
        super().__init__(2, name="axes")

    def membership(self, point):
        x, y = point
        if _zero(x) and _zero(y):
            return "origin"
        if _zero(y):
            return "x-axis"
        if _zero(x):
            return "y-axis"
        return None

    def axes_of(self, m: SmoothMapSpec) -> set[str]:
        if m.is_polynomial:
            out = set()
            if m.components[1].is_zero():
                out.add("x-axis")
            if m.components[0].is_zero():
                out.add("y-axis")
            return out
        pts = _sample_images(m)
        out = set()
        if all(_zero(p[1]) for p in pts):
            out.add("x-axis")
        if all(_zero(p[0]) for p in pts):
            out.add("y-axis")
        return out

    def plaque_rule(self, m):
        if self.axes_of(m):
            return True, ""
        return False, "image is not contained in a single axis"

    def realize(self, base, velocity):
        label = self.membership(base)
        vx, vy = velocity
        if label is None:
            raise NotATangentVector(f"{tuple(base)} is not on the axes")
        ok = (label == "x-axis" and _zero(vy)) or (label == "y-axis" and _zero(vx)) or \
             (label == "origin" and (_zero(vx) or _zero(vy)))
        if not ok:
            raise NotATangentVector(f"{tuple(velocity)} is not tangent to the axes at {tuple(base)}")
        return SmoothMapSpec.affine([[vx], [vy]], list(base), num_vars=1)

    def probe_curves(self, base, rng, budget):
        label = self.membership(base)
        out = []
        if label in ("x-axis", "origin"):
            out += [("x-axis", self.realize(base, (1, 0))), ("x-axis", self.realize(base, (random_rational(rng) or 1, 0)))]
        if label in ("y-axis", "origin"):
            out += [("y-axis", self.realize(base, (0, 1))), ("y-axis", self.realize(base, (0, random_rational(rng) or 1)))]
        return out[:max(budget, 2)]

    def add_plaques(self, p1, p2):
        q = super().add_plaques(p1, p2)
        return q if q is not None and self.plaque_rule(q)[0] else None

    def join_obstruction(self, p1, p2, mode):
        if mode == "strong":
            s1 = [tuple(row) for row in zip(*signature_matrix(self, p1))]
            s2 = [tuple(row) for row in zip(*signature_matrix(self, p2))]
            b1 = {"x-axis" if not _zero(v[0]) else "y-axis" for v in s1 if not all(_zero(c) for c in v)}
            b2 = {"x-axis" if not _zero(v[0]) else "y-axis" for v in s2 if not all(_zero(c) for c in v)}
        else:
            b1, b2 = self.axes_of(p1), self.axes_of(p2)
            b1 = set() if len(b1) == 2 else b1
            b2 = set() if len(b2) == 2 else b2
        if b1 and b2 and b1 != b2:
            return {"reason": "branch obstruction: a joint plaque lies on one axis",
                    "branches": [sorted(b1), sorted(b2)]}
        return None

    def sample_point(self, rng):
        c = random_rational(rng)
        return (c, Fraction(0)) if rng.random() < 0.5 else (Fraction(0), c)

    def _axis_for(self, rng, base) -> int:
        label = self.membership(base)
        if label == "x-axis":
            return 0
        if label == "y-axis":
            return 1
        return rng.randrange(2)

    def sample_plaque(self, rng, base, dim):
        axis = self._axis_for(rng, base)
        comps = [PolyExpr.constant(b, dim) for b in base]
        comps[axis] = comps[axis] + random_poly(rng, dim, 2, zero_constant=True)
        return SmoothMapSpec(comps, num_vars=dim)

    def sample_plaque_pair(self, rng, base, n, m):
        axis = self._axis_for(rng, base)
        shared = random_poly(rng, n, 2, zero_constant=True).embed(n + m, range(n))
        out = []
        for _ in range(2):
            comps = [PolyExpr.constant(b, n + m) for b in base]
            extra = PolyExpr.zero(n + m)
            for s in PolyExpr.variables(n + m)[n:]:
                extra = extra + s * random_poly(rng, n + m, 1)
            comps[axis] = comps[axis] + shared + extra
            out.append(SmoothMapSpec(comps, num_vars=n + m))
        return out[0], out[1]

    def functions_equal(self, f, g):
        diff = f - g
        return diff.fix({1: 0}).is_zero() and diff.fix({0: 0}).is_zero()

    def field_basis(self):
        x, y = PolyExpr.variables(2)
        zero = PolyExpr.zero(2)
        return [SpaceVectorField(self, [x, zero], name="xi1"), SpaceVectorField(self, [zero, y], name="xi2")]

    def field_is_tangent(self, xi):
        a, b = xi.components
        return b.fix({1: 0}).is_zero() and a.fix({0: 0}).is_zero()

    def decompose_field(self, xi):
        """``xi = h_1(x) xi_1 + h_2(y) xi_2`` via the division ``h(t) = t g(t)``."""
        if xi.components is None or not self.field_is_tangent(xi):
            raise NotATangentVector("field is not tangent to both axes")
        a, b = xi.components
        return [a.fix({1: 0}).divide_by_var(0).embed(2, [0]), b.fix({0: 0}).divide_by_var(0).embed(2, [1])]

    def special_points(self):
        return [(Fraction(0), Fraction(0))]


class LinesPlane(DiffSpace):
    """R^2 whose plaques are the maps with image in a line."""

    kind = "lines"

    def __init__(self):
        super().__init__(2, name="lines")

    def line_direction(self, m: SmoothMapSpec) -> tuple[bool, tuple | None]:
        """Whether the image lies in a line, and a direction of that line (None if constant)."""
        if m.is_polynomial:
            c0 = m.components[0] - m.components[0].constant_term
            c1 = m.components[1] - m.components[1].constant_term
            d = None
            for exp in sorted(set(c0.terms) | set(c1.terms)):
                v = (c0.coefficient(exp), c1.coefficient(exp))
                if d is None:
                    d = v
                elif _cross2(d, v) != 0:
                    return False, None
            return True, d
        pts = _sample_images(m, 11)
        diffs = [(p[0] - pts[0][0], p[1] - pts[0][1]) for p in pts[1:]]
        ref = max(diffs, key=lambda v: abs(v[0]) + abs(v[1]), default=(0.0, 0.0))
        size = math.hypot(*ref)
        if size < TOL:
            return True, None
        d = (ref[0] / size, ref[1] / size)
        ok = all(abs(_cross2(d, v)) <= 1e-7 for v in diffs)
        return ok, d if ok else None

    def plaque_rule(self, m):
        ok, _ = self.line_direction(m)
        return (True, "") if ok else (False, "image is not contained in a line")

    def add_plaques(self, p1, p2):
        base = p1.evaluate((Fraction(0),) * p1.num_vars, check_domain=False)
        j1, j2 = jacobian_at_zero(p1), jacobian_at_zero(p2)
        total = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(j1, j2)]
        if rank([list(col) for col in zip(*total)]) > 1:
            return None
        if any(isinstance(v, float) for row in total for v in row) or any(isinstance(v, float) for v in base):
            return None
        return SmoothMapSpec.affine(total, list(base), num_vars=p1.num_vars)

    def sum_along(self, p1, p2, n):
        if n == 0:
            return self.add_plaques(p1, p2)
        q = super().sum_along(p1, p2, n)
        return q if q is not None and self.plaque_rule(q)[0] else None

    def _random_direction(self, rng):
        while True:
            d = (random_rational(rng), random_rational(rng))
            if any(d):
                return d

    def sample_plaque(self, rng, base, dim):
        d = self._random_direction(rng)
        phi = random_poly(rng, dim, 2, zero_constant=True)
        return SmoothMapSpec([phi * d[0] + base[0], phi * d[1] + base[1]], num_vars=dim)

    def sample_plaque_pair(self, rng, base, n, m):
        shared = random_poly(rng, n, 2, zero_constant=True).embed(n + m, range(n))
        d = self._random_direction(rng)
        out = []
        for _ in range(2):
            if n == 0:
                d = self._random_direction(rng)
            phi = shared
            for s in PolyExpr.variables(n + m)[n:]:
                phi = phi + s * random_poly(rng, n + m, 1)
            out.append(SmoothMapSpec([phi * d[0] + base[0], phi * d[1] + base[1]], num_vars=n + m))
        return out[0], out[1]

    def join_obstruction(self, p1, p2, mode):
        if mode == "strong":
            cols = [list(c) for c in zip(*signature_matrix(self, p1))] + \
                   [list(c) for c in zip(*signature_matrix(self, p2))]
            dirs = independent_rows(cols)
            kind = "classes"
        else:
            dirs = [d for d in (self.line_direction(p1)[1], self.line_direction(p2)[1]) if d is not None]
            dirs = independent_rows(dirs)
            kind = "images"
        if len(dirs) == 2:
            return {"reason": "line-direction obstruction: a joint plaque has image in one line",
                    "compared": kind, "directions": dirs, "determinant": det(dirs)}
        return None

    def integrability_obstruction(self, xi, p, r0):
        _, d = self.line_direction(p)
        if d is None:
            return None
        for r in [tuple(r0)] + sample_domain_points(p.domain, p.num_vars, count=3):
            F = p.evaluate(r, check_domain=False)
            v = xi.velocity(F)
            if not _zero(_cross2(d, v), 1e-7):
                return {"reason": "field leaves the line of the plaque", "point": list(F),
                        "line_direction": list(d), "field_value": list(v)}
        return None

    def integrability_test_plaques(self, xi, point):
        v = xi.velocity(point)
        dirs = [(1, 0), (0, 1)]
        if any(not _zero(c) for c in v):
            dirs.append((-v[1], v[0]))
        return [SmoothMapSpec.affine([[d[0]], [d[1]]], list(point), num_vars=1) for d in dirs]


class MeridianSphere(DiffSpace):
    """The unit sphere; plaques are arcs of great circles through the poles.

    A plaque is ``r -> (sin a cos l, sin a sin l, cos a)`` with ``a = a0 + theta(r)``
    and a fixed longitude l in [0, pi); the predicate accepts constructor-made
    maps and otherwise tests samples for lying on the sphere and in one plane
    through the polar axis.
    """

    kind = "sphere_parallels"

    def __init__(self):
        super().__init__(3, name="sphere_parallels")

    @staticmethod
    def point(lam: float, angle: float) -> tuple:
        s = math.sin(angle)
        return (s * math.cos(lam), s * math.sin(lam), math.cos(angle))

    @staticmethod
    def frame(lam: float, angle: float) -> tuple:
        """Unit tangent along the great circle at longitude ``lam``."""
        c = math.cos(angle)
        return (c * math.cos(lam), c * math.sin(lam), -math.sin(angle))

    def membership(self, point):
        x, y, z = (float(v) for v in point)
        if abs(x * x + y * y + z * z - 1) > 1e-7:
            return None
        if math.hypot(x, y) < 1e-9:
            return "north-pole" if z > 0 else "south-pole"
        return "main"

    def coords(self, point) -> tuple[float, float]:
        x, y, z = (float(v) for v in point)
        rho = math.hypot(x, y)
        if rho < 1e-12:
            return 0.0, 0.0 if z > 0 else math.pi
        return math.atan2(y, x), math.atan2(rho, z)

    def meridian_plaque(self, lam: float, angle0: float, theta: PolyExpr, domain: Box | None = None) -> SmoothMapSpec:
        if lam >= math.pi or lam < 0:
            lam = lam % (2 * math.pi)
            if lam >= math.pi:
                lam, angle0, theta = lam - math.pi, -angle0, -theta
        n = theta.num_vars
        point = self.point

        def func(r):
            return point(lam, angle0 + float(theta.evaluate(r)))
        return SmoothMapSpec.black_box(func, n, 3, domain or Box.cube(n, 1),
                                       meta={"meridian": (lam, angle0, theta), "plane": lam})

    def _flow_plaque(self, lam, angle_of, n, domain) -> SmoothMapSpec:
        point = self.point
        return SmoothMapSpec.black_box(lambda r: point(lam, angle_of(r)), n, 3, domain, meta={"plane": lam % math.pi})

    def plane_of(self, m: SmoothMapSpec) -> float | None:
        if "plane" in m.meta:
            meta = m.meta.get("meridian")
            if meta is not None and meta[2].is_zero():
                return None
            return m.meta["plane"] % math.pi
        pts = _sample_images(m)
        ref = max(pts, key=lambda p: math.hypot(float(p[0]), float(p[1])))
        if math.hypot(float(ref[0]), float(ref[1])) < 1e-9:
            return None
        return math.atan2(float(ref[1]), float(ref[0])) % math.pi

    def plaque_rule(self, m):
        if "plane" in m.meta:
            return True, ""
        if m.is_polynomial and not m.is_constant():
            return False, "a non-constant polynomial map cannot stay on the sphere"
        pts = _sample_images(m)
        if any(self.membership(p) is None for p in pts):
            return False, "image leaves the sphere"
        lam = self.plane_of(m)
        if lam is None:
            if all(points_close(p, pts[0], 1e-9) for p in pts):
                return True, ""
            return False, "image is not contained in a great circle through the poles"
        normal = (-math.sin(lam), math.cos(lam))
        if all(abs(normal[0] * float(p[0]) + normal[1] * float(p[1])) < 1e-7 for p in pts):
            return True, ""
        return False, "image is not contained in a great circle through the poles"

    def realize(self, base, velocity):
        if self.membership(base) is None:
            raise NotATangentVector(f"{tuple(base)} is not on the sphere")
        v = [float(c) for c in velocity]
        lam, a0 = self.coords(base)
        t = PolyExpr.var(0, 1)
        if self.membership(base) == "main":
            e = self.frame(lam, a0)
            c = sum(a * b for a, b in zip(v, e))
            if any(abs(a - c * b) > 1e-7 for a, b in zip(v, e)):
                raise NotATangentVector(f"{tuple(velocity)} is not along the great circle at {tuple(base)}")
            return self.meridian_plaque(lam, a0, t * Fraction(c))
        if abs(v[2]) > 1e-7:
            raise NotATangentVector("velocity at a pole must be horizontal")
        speed = math.hypot(v[0], v[1])
        if speed == 0:
            return self.meridian_plaque(0.0, a0, PolyExpr.zero(1))
        if a0 == 0.0:
            lam = math.atan2(v[1], v[0])
        else:
            lam = math.atan2(-v[1], -v[0])
        return self.meridian_plaque(lam % (2 * math.pi), a0, t * Fraction(speed))

    def probe_curves(self, base, rng, budget):
        label = self.membership(base)
        if label == "main":
            lam, a0 = self.coords(base)
            e = self.frame(lam, a0)
            return [("meridian", self.realize(base, e)), ("meridian", self.realize(base, [2 * c for c in e]))]
        out = []
        for k in range(max(budget, 3)):
            ang = math.pi * k / max(budget, 3)
            out.append((f"plane:{ang:.4f}", self.realize(base, (math.cos(ang), math.sin(ang), 0.0))))
        return out

    def join_candidates(self, p1, p2):
        m1, m2 = p1.meta.get("meridian"), p2.meta.get("meridian")
        if m1 is None or m2 is None:
            return []
        (l1, a1, t1), (l2, a2, t2) = m1, m2
        if t1.is_zero():
            lam, a1 = l2, a2
        elif t2.is_zero() or abs(l1 - l2) < 1e-9:
            lam = l1
        else:
            return []
        n, m = p1.num_vars, p2.num_vars
        theta = t1.embed(n + m, range(n)) + t2.embed(n + m, range(n, n + m))
        box = Box(p1.domain.lo + p2.domain.lo, p1.domain.hi + p2.domain.hi)
        return [("common-meridian", self.meridian_plaque(lam, a1, theta, box))]

    def join_obstruction(self, p1, p2, mode):
        l1, l2 = self.plane_of(p1), self.plane_of(p2)
        if l1 is None or l2 is None:
            return None
        diff = abs(l1 - l2) % math.pi
        if min(diff, math.pi - diff) > 1e-9:
            return {"reason": "meridian-plane obstruction: a joint plaque lies in one great circle "
                              "through the poles", "planes": [l1, l2]}
        return None

    def add_plaques(self, p1, p2):
        cands = self.join_candidates(p1, p2)
        if not cands or p1.num_vars != p2.num_vars:
            return None
        (l1, a1, t1), (_l2, _a2, t2) = p1.meta["meridian"], p2.meta["meridian"]
        lam = cands[0][1].meta["plane"]
        return self.meridian_plaque(lam, a1, t1 + t2, p1.domain)

    def integrate_candidates(self, xi, p):
        meta = p.meta.get("meridian")
        n = p.num_vars
        if meta is None:
            return []
        lam, a0, theta = meta
        base = p.evaluate((Fraction(0),) * n, check_domain=False)
        if theta.is_zero() and self.membership(base) != "main":
            v = [float(c) for c in xi.velocity(base)]
            if math.hypot(v[0], v[1]) > 1e-12:
                lam = math.atan2(v[1], v[0]) if a0 == 0.0 else math.atan2(-v[1], -v[0])
        point, frame = self.point, self.frame

        def angle_of(rt):
            r, t = rt[:n], rt[n]
            a = a0 + float(theta.evaluate(r))
            v = xi.velocity(point(lam, a))
            c = sum(float(x) * y for x, y in zip(v, frame(lam, a)))
            return a + t * c
        box = Box(p.domain.lo + (-1.0,), p.domain.hi + (1.0,))
        return [("meridian-flow", self._flow_plaque(lam, angle_of, n + 1, box))]

    def integrability_obstruction(self, xi, p, r0):
        lam = self.plane_of(p)
        if lam is None:
            return None
        F = p.evaluate(tuple(r0), check_domain=False)
        v = xi.velocity(F)
        off = -math.sin(lam) * float(v[0]) + math.cos(lam) * float(v[1])
        if abs(off) > 1e-7:
            return {"reason": "field leaves the great circle of the plaque", "point": [float(c) for c in F],
                    "plane": lam, "normal_component": off}
        return None

    def integrability_test_plaques(self, xi, point):
        lam, a0 = self.coords(point)
        t = PolyExpr.var(0, 1)
        out = [self.meridian_plaque(lam, a0, PolyExpr.zero(1))]
        if self.membership(point) == "main":
            out.append(self.meridian_plaque(lam, a0, t))
        else:
            for ang in (0.0, math.pi / 2, math.pi / 4):
                out.append(self.meridian_plaque(ang, a0, t))
        return out

    def sample_point(self, rng):
        return self.point(rng.uniform(0, 2 * math.pi), rng.uniform(0.2, math.pi - 0.2))

    def sample_plaque(self, rng, base, dim):
        lam, a0 = self.coords(base)
        if self.membership(base) != "main":
            lam = rng.uniform(0, math.pi)
        theta = random_poly(rng, dim, 2, zero_constant=True, bound=1) * Fraction(1, 4)
        return self.meridian_plaque(lam, a0, theta)

    def sample_plaque_pair(self, rng, base, n, m):
        lam, a0 = self.coords(base)
        if self.membership(base) != "main":
            lam = rng.uniform(0, math.pi)
        shared = random_poly(rng, n, 2, zero_constant=True, bound=1).embed(n + m, range(n)) * Fraction(1, 4)
        out = []
        for _ in range(2):
            theta = shared
            for s in PolyExpr.variables(n + m)[n:]:
                theta = theta + s * random_poly(rng, n + m, 1, bound=1) * Fraction(1, 4)
            out.append(self.meridian_plaque(lam, a0, theta))
        return out[0], out[1]

    def sum_along(self, p1, p2, n):
        m1, m2 = p1.meta.get("meridian"), p2.meta.get("meridian")
        if m1 is None or m2 is None or abs(m1[0] - m2[0]) > 1e-12 or m1[1] != m2[1]:
            return None
        total = p1.num_vars
        t1, t2 = m1[2], m2[2]
        shared = t1.fix({i: 0 for i in range(n, total)}).embed(total, range(n))
        return self.meridian_plaque(m1[0], m1[1], t1 + t2 - shared, p1.domain)

    def special_points(self):
        return [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]

    def meridian_field(self, scale: PolyExpr | None = None) -> SpaceVectorField:
        """``(xz, yz, z^2 - 1)`` times ``scale``: tangent to the great circles, zero at the poles."""
        x, y, z = PolyExpr.variables(3)
        comps = [x * z, y * z, z * z - 1]
        if scale is not None:
            comps = [c * scale for c in comps]
        return SpaceVectorField(self, comps, name="meridian-field")


class TangentPlanes(DiffSpace):
    """The sheets ``z = 0`` and ``z = x^2 + y^2`` of R^3, tangent at the origin.

    Plaques stay on one sheet.  Pairs of plaques on different sheets through
    the origin admit no pointwise joint plaque, but always a classwise one,
    so the space has no strongly transverse points.
    """

    kind = "tangent_planes"
    non_transverse = True

    def __init__(self):
        super().__init__(3, name="tangent_planes")

    def membership(self, point):
        x, y, z = point
        on0 = _zero(z)
        on1 = _zero(z - (x * x + y * y))
        if on0 and on1:
            return "origin"
        if on0:
            return "sheet0"
        if on1:
            return "sheet1"
        return None

    @staticmethod
    def lift(sheet: int, X: PolyExpr, Y: PolyExpr) -> list[PolyExpr]:
        return [X, Y, X * X + Y * Y if sheet else PolyExpr.zero(X.num_vars)]

    def sheets_of(self, m: SmoothMapSpec) -> set[int]:
        if not m.is_polynomial:
            pts = _sample_images(m)
            return {s for s in (0, 1) if all(_zero(p[2] - s * (p[0] ** 2 + p[1] ** 2)) for p in pts)}
        x, y, z = m.components
        out = set()
        if z.is_zero():
            out.add(0)
        if z == x * x + y * y:
            out.add(1)
        return out

    def plaque_rule(self, m):
        return (True, "") if self.sheets_of(m) else (False, "image is not contained in one sheet")

    def _sheet_at(self, point) -> int:
        return 1 if self.membership(point) == "sheet1" else 0

    def realize(self, base, velocity):
        label = self.membership(base)
        if label is None:
            raise NotATangentVector(f"{tuple(base)} is not on either sheet")
        sheet = self._sheet_at(base)
        vx, vy, vz = velocity
        expected = 2 * base[0] * vx + 2 * base[1] * vy if sheet else 0
        if not _zero(vz - expected):
            raise NotATangentVector(f"{tuple(velocity)} is not tangent at {tuple(base)}")
        t = PolyExpr.var(0, 1)
        return SmoothMapSpec(self.lift(sheet, t * vx + base[0], t * vy + base[1]), num_vars=1)

    def probe_curves(self, base, rng, budget):
        label = self.membership(base)
        x, y, _ = base
        vecs = [(1, 0, 2 * x), (0, 1, 2 * y)] if label == "sheet1" else [(1, 0, 0), (0, 1, 0)]
        out = [(label, self.realize(base, v)) for v in vecs]
        for _ in range(max(0, budget - 2)):
            a, b = random_rational(rng), random_rational(rng)
            out.append((label, self.realize(base, (a, b, (2 * x * a + 2 * y * b) if label == "sheet1" else 0))))
        return out

    def _xy(self, m: SmoothMapSpec) -> tuple[PolyExpr, PolyExpr]:
        return m.components[0], m.components[1]

    def _sheet_for(self, *maps: SmoothMapSpec) -> list[int]:
        for m in maps:
            s = self.sheets_of(m)
            if len(s) == 1:
                return list(s)
        return [0, 1]

    def add_plaques(self, p1, p2):
        base = p1.evaluate((Fraction(0),) * p1.num_vars, check_domain=False)
        (x1, y1), (x2, y2) = self._xy(p1), self._xy(p2)
        sheet = self._sheet_for(p1, p2)[0]
        return SmoothMapSpec(self.lift(sheet, x1 + x2 - base[0], y1 + y2 - base[1]), p1.domain,
                             num_vars=p1.num_vars)

    def sum_along(self, p1, p2, n):
        total = p1.num_vars
        zero_s = {i: 0 for i in range(n, total)}
        (x1, y1), (x2, y2) = self._xy(p1), self._xy(p2)
        bx = x1.fix(zero_s).embed(total, range(n))
        by = y1.fix(zero_s).embed(total, range(n))
        sheet = self._sheet_for(p1, p2)[0]
        return SmoothMapSpec(self.lift(sheet, x1 + x2 - bx, y1 + y2 - by), num_vars=total)

    def join_candidates(self, p1, p2):
        n, m = p1.num_vars, p2.num_vars
        base = p1.evaluate((Fraction(0),) * n, check_domain=False)
        x1, y1 = (c.embed(n + m, range(n)) for c in self._xy(p1))
        x2, y2 = (c.embed(n + m, range(n, n + m)) for c in self._xy(p2))
        X, Y = x1 + x2 - base[0], y1 + y2 - base[1]
        return [(f"sheet{s}-lift", SmoothMapSpec(self.lift(s, X, Y), num_vars=n + m))
                for s in self._sheet_for(p1, p2)]

    def join_obstruction(self, p1, p2, mode):
        s1, s2 = self.sheets_of(p1), self.sheets_of(p2)
        if mode == "weak" and len(s1) == 1 and len(s2) == 1 and s1 != s2:
            return {"reason": "sheet obstruction: a joint plaque lies on one sheet",
                    "sheets": [sorted(s1), sorted(s2)]}
        return None

    def join_along(self, p, qs):
        n, k = p.num_vars, len(qs)
        px, py = (c.embed(n + k, range(n)) for c in self._xy(p))
        X, Y = px, py
        for i, q in enumerate(qs):
            qx, qy = (c.embed(n + k, list(range(n)) + [n + i]) for c in self._xy(q))
            X, Y = X + qx - px, Y + qy - py
        sheet = self._sheet_for(p, *qs)[0]
        return SmoothMapSpec(self.lift(sheet, X, Y), num_vars=n + k)

    def integrate_candidates(self, xi, p):
        if not p.is_polynomial or xi.components is None:
            return []
        n = p.num_vars
        comps = embed_polynomial(p, n + 1, range(n))
        t = PolyExpr.var(n, n + 1)
        a, b = (c.substitute(comps) for c in xi.components[:2])
        X, Y = comps[0] + t * a, comps[1] + t * b
        return [(f"sheet{s}-flow", SmoothMapSpec(self.lift(s, X, Y), num_vars=n + 1))
                for s in self._sheet_for(p)]

    def sample_point(self, rng):
        x, y = random_rational(rng), random_rational(rng)
        return (x, y, x * x + y * y) if rng.random() < 0.5 else (x, y, Fraction(0))

    def sample_plaque(self, rng, base, dim):
        label = self.membership(base)
        sheet = {"sheet0": 0, "sheet1": 1}.get(label, rng.randrange(2))
        X = random_poly(rng, dim, 2, zero_constant=True) + base[0]
        Y = random_poly(rng, dim, 2, zero_constant=True) + base[1]
        return SmoothMapSpec(self.lift(sheet, X, Y), num_vars=dim)

    def sample_plaque_pair(self, rng, base, n, m):
        label = self.membership(base)
        sheet = {"sheet0": 0, "sheet1": 1}.get(label, rng.randrange(2))
        shared = [random_poly(rng, n, 2, zero_constant=True).embed(n + m, range(n)) + base[i] for i in range(2)]
        out = []
        for _ in range(2):
            XY = []
            for c in shared:
                for s in PolyExpr.variables(n + m)[n:]:
                    c = c + s * random_poly(rng, n + m, 1)
                XY.append(c)
            out.append(SmoothMapSpec(self.lift(sheet, *XY), num_vars=n + m))
        return out[0], out[1]

    def tangent_fields(self, m: PolyExpr) -> list[SpaceVectorField]:
        """Two families of fields tangent to both sheets: radial ``(x, y, 2z) m`` and rotational ``(-y, x, 0) m``."""
        x, y, z = PolyExpr.variables(3)
        zero = PolyExpr.zero(3)
        return [SpaceVectorField(self, [x * m, y * m, z * m * 2], name="radial"),
                SpaceVectorField(self, [-y * m, x * m, zero], name="rotational")]

    def field_is_tangent(self, xi):
        a, b, c = xi.components
        x, y, _ = PolyExpr.variables(3)
        on0 = c.fix({2: 0}).is_zero()
        paraboloid = [x, y, x * x + y * y]
        on1 = (c - x * a * 2 - y * b * 2).substitute(paraboloid).is_zero()
        return on0 and on1

    def special_points(self):
        return [(Fraction(0),) * 3]


# atlases

@dataclass
class Chart:
    """A chart ``forward: U -> M`` with an ambient-defined ``inverse``."""

    name: str
    forward: SmoothMapSpec
    inverse: SmoothMapSpec
    contains: Callable[[Sequence], bool]
    forward_jacobian: Callable | None = None
    inverse_jacobian: Callable | None = None

    @property
    def dim(self) -> int:
        return self.forward.num_vars

    def fwd_jac(self, u) -> list[list]:
        if self.forward_jacobian is not None:
            return self.forward_jacobian(tuple(float(v) for v in u))
        return jacobian(self.forward, u)

    def inv_jac(self, F) -> list[list]:
        if self.inverse_jacobian is not None:
            return self.inverse_jacobian(tuple(float(v) for v in F))
        return jacobian(self.inverse, F)

    @property
    def exact(self) -> bool:
        return self.forward.is_polynomial and self.inverse.is_polynomial


class Atlas:
    def __init__(self, name: str, charts: Sequence[Chart], ambient_dim: int, tolerance: float = 0.0):
        self.name = name
        self.charts = list(charts)
        self.ambient_dim = ambient_dim
        self.dim = self.charts[0].dim
        self.tolerance = tolerance

    def charts_at(self, F) -> list[int]:
        return [i for i, c in enumerate(self.charts) if c.contains(F)]

    def transition(self, i: int, j: int) -> SmoothMapSpec:
        """``alpha_i^{-1} o alpha_j`` on the chart box of j."""
        return compose(self.charts[i].inverse, self.charts[j].forward)

    def transition_jacobian(self, i: int, j: int, u) -> list[list]:
        cj, ci = self.charts[j], self.charts[i]
        a, b = ci.inv_jac(cj.forward.evaluate(u, check_domain=False)), cj.fwd_jac(u)
        return [[sum(a[r][k] * b[k][c] for k in range(len(b))) for c in range(len(b[0]))] for r in range(len(a))]

    def sample_chart_point(self, rng: random.Random, j: int) -> tuple:
        if self.charts[j].exact:
            return tuple(random_rational(rng, 1) for _ in range(self.dim))
        return tuple(rng.uniform(-1.5, 1.5) for _ in range(self.dim))

    def sample_point(self, rng: random.Random) -> tuple:
        j = rng.randrange(len(self.charts))
        return self.charts[j].forward.evaluate(self.sample_chart_point(rng, j), check_domain=False)

    def overlap_samples(self, rng: random.Random, count: int) -> list[tuple[int, int, tuple]]:
        """Triples ``(i, j, u)`` with ``alpha_j(u)`` inside chart i as well."""
        out, tries = [], 0
        pairs = [(i, j) for i in range(len(self.charts)) for j in range(len(self.charts)) if i != j]
        while len(out) < count and tries < 50 * count and pairs:
            tries += 1
            i, j = pairs[tries % len(pairs)]
            u = self.sample_chart_point(rng, j)
            F = self.charts[j].forward.evaluate(u, check_domain=False)
            if self.charts[i].contains(F):
                out.append((i, j, u))
        return out

    def _close(self, a, b) -> bool:
        return points_close(a, b, self.tolerance if self.tolerance else 0)

    def coherence_check(self, samples: int = 16, rng: random.Random | None = None) -> CheckReport:
        """``alpha_i^{-1} o alpha_i = id`` and the cocycle identity on triple overlaps."""
        rng = rng or random.Random(0)
        report = CheckReport(f"atlas-coherence:{self.name}")
        for i, c in enumerate(self.charts):
            back = compose(c.inverse, c.forward)
            if back.is_polynomial:
                report.add(f"identity-{i}", list(back.components) == PolyExpr.variables(self.dim))
            else:
                pts = [self.sample_chart_point(rng, i) for _ in range(samples)]
                report.add(f"identity-{i}", all(self._close(back.evaluate(u, check_domain=False), u) for u in pts))
        for k, (i, j, u) in enumerate(self.overlap_samples(rng, samples)):
            F = self.charts[j].forward.evaluate(u, check_domain=False)
            for m in self.charts_at(F):
                lhs = self.transition(i, m).evaluate(self.transition(m, j).evaluate(u, check_domain=False),
                                                     check_domain=False)
                rhs = self.transition(i, j).evaluate(u, check_domain=False)
                report.add(f"cocycle-{k}-{i}{m}{j}", self._close(lhs, rhs))
        return report


class AtlasSpace(DiffSpace):
    """A manifold embedded in R^N and described by an atlas."""

    kind = "atlas"
    non_transverse = True

    def __init__(self, atlas: Atlas):
        super().__init__(atlas.ambient_dim, name=f"atlas:{atlas.name}")
        self.atlas = atlas

    def membership(self, point):
        return "main" if self.atlas.charts_at(point) else None

    def plaque_rule(self, m):
        if "chart" in m.meta:
            return True, ""
        for F in _sample_images(m, 5):
            if self.membership(F) is None:
                return False, "image leaves the manifold"
        if m.is_polynomial and self.atlas.dim < self.ambient_dim and not m.is_constant():
            return False, "a polynomial map into a compact manifold is constant"
        return True, ""

    def _chart_for(self, F) -> int:
        idx = self.atlas.charts_at(F)
        if not idx:
            raise DomainError(f"{tuple(F)} lies in no chart")
        return idx[0]

    def chart_plaque(self, i: int, phi: SmoothMapSpec) -> SmoothMapSpec:
        c = self.atlas.charts[i]
        q = compose(c.forward, phi)
        if q.is_polynomial:
            return q
        return SmoothMapSpec.black_box(q.func, q.num_vars, q.codim, q.domain, meta={"chart": (i, phi)})

    def realize(self, base, velocity):
        i = self._chart_for(base)
        c = self.atlas.charts[i]
        u0 = c.inverse.evaluate(base, check_domain=False)
        jinv = c.inv_jac(base)
        w = [sum(a * v for a, v in zip(row, velocity)) for row in jinv]
        back = c.fwd_jac(u0)
        if not points_close([sum(a * x for a, x in zip(row, w)) for row in back], list(velocity), 1e-7):
            raise NotATangentVector(f"{tuple(velocity)} is not tangent at {tuple(base)}")
        if all(not isinstance(v, float) for v in list(u0) + w):
            phi = SmoothMapSpec.affine([[x] for x in w], list(u0), num_vars=1)
        else:
            phi = SmoothMapSpec.black_box(lambda t: tuple(a + t[0] * b for a, b in zip(u0, w)), 1, len(w))
        return self.chart_plaque(i, phi)

    def probe_curves(self, base, rng, budget):
        i = self._chart_for(base)
        c = self.atlas.charts[i]
        J = c.fwd_jac(c.inverse.evaluate(base, check_domain=False))
        cols = [[row[k] for row in J] for k in range(self.atlas.dim)]
        return [("main", self.realize(base, v)) for v in cols]

    def join_candidates(self, p1, p2):
        if p1.is_polynomial and p2.is_polynomial:
            n, m = p1.num_vars, p2.num_vars
            a = embed_polynomial(p1, n + m, range(n))
            b = embed_polynomial(p2, n + m, range(n, n + m))
            base = p1.evaluate((Fraction(0),) * n, check_domain=False)
            q = SmoothMapSpec([x + y - c for x, y, c in zip(a, b, base)], Box.cube(n + m, Fraction(1, 64)),
                              num_vars=n + m)
            return [("local-additive", q)]
        m1, m2 = p1.meta.get("chart"), p2.meta.get("chart")
        if m1 is None or m2 is None or m1[0] != m2[0]:
            return []
        i, (phi1, phi2) = m1[0], (m1[1], m2[1])
        n, m = phi1.num_vars, phi2.num_vars
        u0 = phi1.evaluate((0.0,) * n, check_domain=False)

        def phi(rs):
            a = phi1.evaluate(rs[:n], check_domain=False)
            b = phi2.evaluate(rs[n:], check_domain=False)
            return tuple(x + y - z for x, y, z in zip(a, b, u0))
        joined = SmoothMapSpec.black_box(phi, n + m, len(u0))
        return [("chart-additive", self.chart_plaque(i, joined))]

    def sample_point(self, rng):
        return self.atlas.sample_point(rng)

    def sample_plaque(self, rng, base, dim):
        i = self._chart_for(base)
        c = self.atlas.charts[i]
        u0 = c.inverse.evaluate(base, check_domain=False)
        if c.exact and all(not isinstance(v, float) for v in u0):
            comps = [random_poly(rng, dim, 2, zero_constant=True) + u for u in u0]
            return compose(c.forward, SmoothMapSpec(comps, Box.cube(dim, Fraction(1, 8)), num_vars=dim))
        polys = [random_poly(rng, dim, 2, zero_constant=True, bound=1) * Fraction(1, 4) for _ in u0]
        phi = SmoothMapSpec.black_box(lambda r: tuple(u + float(q.evaluate(r)) for u, q in zip(u0, polys)),
                                      dim, len(u0), Box.cube(dim, 1))
        return self.chart_plaque(i, phi)

    def add_plaques(self, p1, p2):
        if p1.is_polynomial and p2.is_polynomial:
            return super().add_plaques(p1, p2)
        m1, m2 = p1.meta.get("chart"), p2.meta.get("chart")
        if m1 is None or m2 is None or m1[0] != m2[0] or p1.num_vars != p2.num_vars:
            return None
        phi1, phi2 = m1[1], m2[1]
        n = phi1.num_vars
        u0 = phi1.evaluate((0.0,) * n, check_domain=False)

        def phi(r):
            a, b = phi1.evaluate(r, check_domain=False), phi2.evaluate(r, check_domain=False)
            return tuple(x + y - z for x, y, z in zip(a, b, u0))
        return self.chart_plaque(m1[0], SmoothMapSpec.black_box(phi, n, len(u0), phi1.domain))

    def delta_plaque(self, i: int, u0: Sequence, deltas: Sequence[PolyExpr], domain: Box) -> SmoothMapSpec:
        """The plaque ``r -> alpha_i(u0 + delta(r))`` for polynomial offsets ``delta``."""
        n = deltas[0].num_vars
        if self.atlas.charts[i].exact and all(not isinstance(v, float) for v in u0):
            return compose(self.atlas.charts[i].forward,
                           SmoothMapSpec([d + u for d, u in zip(deltas, u0)], domain, num_vars=n))
        phi = SmoothMapSpec.black_box(lambda r: tuple(u + float(d.evaluate(r)) for u, d in zip(u0, deltas)),
                                      n, len(u0), domain)
        q = self.chart_plaque(i, phi)
        return SmoothMapSpec.black_box(q.func, n, q.codim, domain,
                                       meta={"chart": (i, phi), "delta": (tuple(u0), tuple(deltas))})

    def sample_plaque_pair(self, rng, base, n, m):
        if all(c.exact for c in self.atlas.charts):
            p1, p2 = super().sample_plaque_pair(rng, base, n, m)
            box = Box.cube(n + m, Fraction(1, 8))
            return p1.restrict(box), p2.restrict(box)
        i = self._chart_for(base)
        u0 = self.atlas.charts[i].inverse.evaluate(base, check_domain=False)
        shared = [random_poly(rng, n, 2, zero_constant=True, bound=1).embed(n + m, range(n)) * Fraction(1, 4)
                  for _ in u0]
        out = []
        for _ in range(2):
            deltas = []
            for d in shared:
                for s in PolyExpr.variables(n + m)[n:]:
                    d = d + s * random_poly(rng, n + m, 1, bound=1) * Fraction(1, 4)
                deltas.append(d)
            out.append(self.delta_plaque(i, u0, deltas, Box.cube(n + m, 0.5)))
        return out[0], out[1]

    def sum_along(self, p1, p2, n):
        if p1.is_polynomial and p2.is_polynomial:
            return super().sum_along(p1, p2, n)
        d1, d2 = p1.meta.get("delta"), p2.meta.get("delta")
        if d1 is None or d2 is None or p1.meta["chart"][0] != p2.meta["chart"][0]:
            return None
        total = p1.num_vars
        zero_s = {i: 0 for i in range(n, total)}
        deltas = [a + b - a.fix(zero_s).embed(total, range(n)) for a, b in zip(d1[1], d2[1])]
        return self.delta_plaque(p1.meta["chart"][0], d1[0], deltas, p1.domain)

    def field_basis(self):
        if self.atlas.dim == self.ambient_dim:
            return coordinate_fields(self)
        raise FixtureError(f"{self.name} has no global frame of polynomial fields")

    def decompose_field(self, xi):
        if self.atlas.dim == self.ambient_dim:
            return list(xi.components)
        raise FixtureError(f"{self.name} has no global frame of polynomial fields")


def _plane2() -> Atlas:
    box = Box.cube(2, 2)
    u, v = PolyExpr.variables(2)
    x, y = PolyExpr.variables(2)
    c0 = Chart("identity", SmoothMapSpec([u, v], box), SmoothMapSpec([x, y]),
               contains=lambda F: box.contains(F))
    half = (x - 1) * Fraction(1, 2)
    inv1 = SmoothMapSpec([half, y - half * half])
    c1 = Chart("shear", SmoothMapSpec([u * 2 + 1, v + u * u], box), inv1,
               contains=lambda F: box.contains(inv1.evaluate(F, check_domain=False)))
    return Atlas("plane2", [c0, c1], 2)


def _circle2() -> Atlas:
    box = Box.cube(1, 10.0)

    def fa(t):
        s = t[0] * t[0]
        return ((1 - s) / (1 + s), 2 * t[0] / (1 + s))

    def fb(t):
        s = t[0] * t[0]
        return ((s - 1) / (1 + s), 2 * t[0] / (1 + s))

    def ja(t):
        q = (1 + t[0] ** 2) ** 2
        return [[-4 * t[0] / q], [2 * (1 - t[0] ** 2) / q]]

    def jb(t):
        q = (1 + t[0] ** 2) ** 2
        return [[4 * t[0] / q], [2 * (1 - t[0] ** 2) / q]]

    ca = Chart("from-west", SmoothMapSpec.black_box(fa, 1, 2, box),
               SmoothMapSpec.black_box(lambda F: (F[1] / (1 + F[0]),), 2, 1),
               contains=lambda F: float(F[0]) > -0.98 and abs(float(F[0]) ** 2 + float(F[1]) ** 2 - 1) < 1e-9,
               forward_jacobian=ja, inverse_jacobian=lambda F: [[-F[1] / (1 + F[0]) ** 2, 1 / (1 + F[0])]])
    cb = Chart("from-east", SmoothMapSpec.black_box(fb, 1, 2, box),
               SmoothMapSpec.black_box(lambda F: (F[1] / (1 - F[0]),), 2, 1),
               contains=lambda F: float(F[0]) < 0.98 and abs(float(F[0]) ** 2 + float(F[1]) ** 2 - 1) < 1e-9,
               forward_jacobian=jb, inverse_jacobian=lambda F: [[F[1] / (1 - F[0]) ** 2, 1 / (1 - F[0])]])
    return Atlas("circle2", [ca, cb], 2, tolerance=1e-9)


def _stereo(sign: int) -> Chart:
    """Stereographic chart from the pole ``(0, 0, sign)``."""
    box = Box.cube(2, 10.0)

    def fwd(w):
        u, v = w
        q = 1 + u * u + v * v
        return (2 * u / q, 2 * v / q, sign * (q - 2) / q)

    def fwd_jac(w):
        u, v = w
        q = 1 + u * u + v * v
        q2 = q * q
        return [[(2 * q - 4 * u * u) / q2, -4 * u * v / q2],
                [-4 * u * v / q2, (2 * q - 4 * v * v) / q2],
                [sign * 4 * u / q2, sign * 4 * v / q2]]

    def inv(F):
        x, y, z = F
        d = 1 - sign * z
        return (x / d, y / d)

    def inv_jac(F):
        x, y, z = F
        d = 1 - sign * z
        return [[1 / d, 0.0, sign * x / (d * d)], [0.0, 1 / d, sign * y / (d * d)]]

    def contains(F):
        x, y, z = (float(c) for c in F)
        return abs(x * x + y * y + z * z - 1) < 1e-9 and sign * z < 0.98

    name = "from-north" if sign > 0 else "from-south"
    return Chart(name, SmoothMapSpec.black_box(fwd, 2, 3, box), SmoothMapSpec.black_box(inv, 3, 2),
                 contains, fwd_jac, inv_jac)


def _sphere2() -> Atlas:
    return Atlas("sphere2", [_stereo(1), _stereo(-1)], 3, tolerance=1e-9)


ATLASES = {"plane2": _plane2, "circle2": _circle2, "sphere2": _sphere2}


def make_euclidean(n: int) -> EuclideanSpace:
    if n < 1:
        raise DimensionError("euclidean fixtures need n >= 1")
    return EuclideanSpace(n)


def make_axes_union() -> AxesUnion:
    return AxesUnion()


def make_lines_plane() -> LinesPlane:
    return LinesPlane()


def make_sphere_parallels() -> MeridianSphere:
    return MeridianSphere()


def make_tangent_planes() -> TangentPlanes:
    return TangentPlanes()


def make_atlas_space(name: str) -> AtlasSpace:
    if name not in ATLASES:
        raise FixtureError(f"unknown atlas {name!r}; known: {sorted(ATLASES)}")
    return AtlasSpace(ATLASES[name]())


FIXTURE_NAMES = ("euclidean:N", "axes", "lines", "sphere_parallels", "tangent_planes",
                 "atlas:plane2", "atlas:circle2", "atlas:sphere2")


def get_fixture(name: str) -> DiffSpace:
    if name.startswith("euclidean:"):
        try:
            return make_euclidean(int(name.split(":", 1)[1]))
        except ValueError as exc:
            raise FixtureError(f"bad euclidean fixture {name!r}") from exc
    if name.startswith("atlas:"):
        return make_atlas_space(name.split(":", 1)[1])
    makers = {"axes": make_axes_union, "lines": make_lines_plane, "sphere_parallels": make_sphere_parallels,
              "tangent_planes": make_tangent_planes}
    if name not in makers:
        raise FixtureError(f"unknown fixture {name!r}; known: {', '.join(FIXTURE_NAMES)}")
    return makers[name]()


def space_from_json(data) -> DiffSpace:
    try:
        kind = data["kind"]
        ambient = int(data["ambient"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed space JSON: {exc}") from exc
    if kind == "euclidean":
        space = make_euclidean(ambient)
    elif kind == "atlas":
        if "name" not in data:
            raise SchemaError("atlas spaces need a 'name'")
        space = make_atlas_space(str(data["name"]).removeprefix("atlas:"))
    elif kind in ("axes", "lines", "sphere_parallels", "tangent_planes"):
        space = get_fixture(kind)
    else:
        raise SchemaError(f"unknown space kind {kind!r}")
    if space.ambient_dim != ambient:
        raise SchemaError(f"{kind} lives in R^{space.ambient_dim}, not R^{ambient}")
    if "generators" in data:
        from .expr import parse_expr
        gens = [parse_expr(g, ambient) for g in data["generators"]]
        if gens != list(space.generators):
            raise SchemaError("only the coordinate generators are supported for fixtures")
    return space


# the four views of a form on an atlas

class ChartForm:
    """A form on one chart box: exact when the chart is polynomial."""

    def __init__(self, chart_index: int, dim: int, degree: int, exact: DifferentialForm | None = None,
                 func: Callable | None = None):
        self.chart_index = chart_index
        self.dim = dim
        self.degree = degree
        self.exact = exact
        self.func = func

    def at(self, u) -> ExteriorForm:
        if self.exact is not None:
            return self.exact.at(u)
        return self.func(tuple(u))


@dataclass
class ChartFormCollection:
    space: AtlasSpace
    degree: int
    forms: list[ChartForm]

    def corrupted(self, chart_index: int, delta: ExteriorForm | DifferentialForm) -> ChartFormCollection:
        """A copy with one chart form shifted, for negative tests."""
        forms = list(self.forms)
        f = forms[chart_index]
        if f.exact is not None and isinstance(delta, DifferentialForm):
            forms[chart_index] = ChartForm(chart_index, f.dim, f.degree, exact=f.exact + delta)
        else:
            forms[chart_index] = ChartForm(chart_index, f.dim, f.degree,
                                           func=lambda u, f=f: f.at(u) + delta)
        return ChartFormCollection(self.space, self.degree, forms)

    def compatibility_witness(self, samples: int = 16, rng: random.Random | None = None) -> dict | None:
        """First overlap point where ``omega_j != T_ij^* omega_i``; None when compatible."""
        atlas = self.space.atlas
        rng = rng or random.Random(0)
        for i, j, u in atlas.overlap_samples(rng, samples):
            wi, wj = self.forms[i], self.forms[j]
            if wi.exact is not None and wj.exact is not None:
                T = atlas.transition(i, j)
                if T.is_polynomial:
                    pulled = wi.exact.pullback(T)
                    if any(pulled.coeff(k) != wj.exact.coeff(k) for k in set(pulled.coeffs) | set(wj.exact.coeffs)):
                        return {"charts": [i, j], "point": list(u), "left": repr(wj.exact), "right": repr(pulled)}
                    continue
            T = atlas.transition(i, j)
            lhs = wj.at(u)
            rhs = wi.at(T.evaluate(u, check_domain=False)).pullback(atlas.transition_jacobian(i, j, u))
            if not lhs.close_to(rhs, atlas.tolerance or 0):
                return {"charts": [i, j], "point": [float(c) for c in u], "left": repr(lhs), "right": repr(rhs)}
        return None


def chart_collection_from_pointwise(space: AtlasSpace, omega: PointwiseForm) -> ChartFormCollection:
    """``omega_i = alpha_i^* omega`` on every chart."""
    forms = []
    for i, c in enumerate(space.atlas.charts):
        if c.forward.is_polynomial and omega.coeffs is not None:
            forms.append(ChartForm(i, c.dim, omega.degree, exact=omega.pullback_along(c.forward)))
        else:
            def func(u, c=c):
                return omega.at(c.forward.evaluate(u, check_domain=False), check=False).pullback(c.fwd_jac(u))
            forms.append(ChartForm(i, c.dim, omega.degree, func=func))
    return ChartFormCollection(space, omega.degree, forms)


def pointwise_from_chart_collection(space: AtlasSpace, collection: ChartFormCollection, samples: int = 16,
                                    rng: random.Random | None = None) -> PointwiseForm:
    """``omega_F = (alpha_i^{-1})^* omega_i`` using the first chart containing F."""
    witness = collection.compatibility_witness(samples, rng)
    if witness is not None:
        raise IncompatibleCollection("chart forms disagree on an overlap", witness)
    atlas = space.atlas

    def rule(F):
        i = space._chart_for(F)
        c = atlas.charts[i]
        return collection.forms[i].at(c.inverse.evaluate(F, check_domain=False)).pullback(c.inv_jac(F))
    return PointwiseForm(space, collection.degree, rule=rule, name="from-charts")


def tangent_basis(space: AtlasSpace, F) -> list[list]:
    i = space._chart_for(F)
    c = space.atlas.charts[i]
    J = c.fwd_jac(c.inverse.evaluate(F, check_domain=False))
    return [[row[k] for row in J] for k in range(space.atlas.dim)]


def forms_agree_on_manifold(space: AtlasSpace, a: PointwiseForm, b: PointwiseForm, F, tol: float = 0.0) -> bool:
    """Equality of two pointwise forms on all k-tuples of a tangent basis at F."""
    basis = tangent_basis(space, F)
    fa, fb = a.at(F, check=False), b.at(F, check=False)
    for idx in multi_index_basis(len(basis), a.degree):
        vs = [basis[i] for i in idx]
        if not values_close(fa.evaluate(*vs), fb.evaluate(*vs), tol):
            return False
    return True


def chart_independence_check(space: AtlasSpace, collection: ChartFormCollection, points: Sequence) -> CheckReport:
    """Every chart containing F yields the same form on the tangent space at F."""
    atlas = space.atlas
    report = CheckReport(f"chart-independence:{space.name}")
    for k, F in enumerate(points):
        idx = atlas.charts_at(F)
        basis = tangent_basis(space, F)
        values = []
        for i in idx:
            c = atlas.charts[i]
            form = collection.forms[i].at(c.inverse.evaluate(F, check_domain=False)).pullback(c.inv_jac(F))
            values.append([form.evaluate(*[basis[j] for j in ix])
                           for ix in multi_index_basis(len(basis), collection.degree)])
        ok = all(points_close(v, values[0], atlas.tolerance or 0) for v in values)
        report.add(f"point-{k}", ok, charts=idx)
    return report


@dataclass
class BundleSection:
    """Per chart, the coefficient vector ``u -> (xi_I(u))`` over increasing multi-indices I."""

    space: AtlasSpace
    degree: int
    coefficients: list[Callable]
    exact: list[list[PolyExpr] | None] = field(default_factory=list)

    @property
    def indices(self) -> list[tuple]:
        return multi_index_basis(self.space.atlas.dim, self.degree)

    def at(self, chart_index: int, u) -> tuple:
        return tuple(self.coefficients[chart_index](tuple(u)))

    def transition_check(self, samples: int = 16, rng: random.Random | None = None) -> CheckReport:
        """Coefficients in chart j are the transition pullback of those in chart i."""
        atlas = self.space.atlas
        rng = rng or random.Random(0)
        report = CheckReport(f"bundle-transition:{self.space.name}")
        idx = self.indices
        for k, (i, j, u) in enumerate(atlas.overlap_samples(rng, samples)):
            T = atlas.transition(i, j)
            src = ExteriorForm(atlas.dim, self.degree,
                               dict(zip(idx, self.at(i, T.evaluate(u, check_domain=False)))))
            pulled = src.pullback(atlas.transition_jacobian(i, j, u))
            ok = points_close([pulled.coeff(I) for I in idx], self.at(j, u), atlas.tolerance or 0)
            report.add(f"overlap-{k}", ok, charts=[i, j])
        return report


def section_from_pointwise(space: AtlasSpace, omega: PointwiseForm) -> BundleSection:
    coll = chart_collection_from_pointwise(space, omega)
    idx = multi_index_basis(space.atlas.dim, omega.degree)
    funcs, exact = [], []
    for f in coll.forms:
        funcs.append(lambda u, f=f: [f.at(u).coeff(I) for I in idx])
        exact.append([f.exact.coeff(I) for I in idx] if f.exact is not None else None)
    return BundleSection(space, omega.degree, funcs, exact)


def pointwise_from_section(space: AtlasSpace, section: BundleSection, samples: int = 16,
                           rng: random.Random | None = None) -> PointwiseForm:
    idx = section.indices
    m = space.atlas.dim
    forms = []
    for i, polys in enumerate(section.exact or [None] * len(space.atlas.charts)):
        if polys is not None:
            forms.append(ChartForm(i, m, section.degree, exact=DifferentialForm(m, section.degree, dict(zip(idx, polys)))))
        else:
            forms.append(ChartForm(i, m, section.degree,
                                   func=lambda u, i=i: ExteriorForm(m, section.degree, dict(zip(idx, section.at(i, u))))))
    return pointwise_from_chart_collection(space, ChartFormCollection(space, section.degree, forms), samples, rng)


# bump extension of a local field

class BumpExtendedField:
    """``g * xi`` with a C^1 piecewise-polynomial cutoff g.

    ``g = 1`` on the ball of radius ``inner`` around ``center`` and ``g = 0``
    outside the ball of radius ``outer``; in between
    ``g = 1 - 3s^2 + 2s^3`` with ``s = (rho^2 - inner^2) / (outer^2 - inner^2)``.
    Exact compactly supported smooth bumps are not polynomial; the C^1 cutoff
    is enough for the value-level argument it serves.
    """

    def __init__(self, local: VectorFieldOnBox, center: Sequence, inner, outer):
        if not 0 < inner < outer:
            raise DomainError("need 0 < inner < outer")
        dom = local.domain
        for c, lo, hi in zip(center, dom.lo, dom.hi):
            if not (lo < c - outer and c + outer < hi):
                raise DomainError("the outer ball is not compactly inside the chart domain")
        self.local = local
        self.center = tuple(center)
        self.inner = inner
        self.outer = outer

    def cutoff(self, x: Sequence):
        rho2 = sum((a - c) ** 2 for a, c in zip(x, self.center))
        a2, b2 = self.inner ** 2, self.outer ** 2
        if rho2 <= a2:
            return Fraction(1)
        if rho2 >= b2:
            return Fraction(0)
        s = (rho2 - a2) / (b2 - a2)
        return 1 - 3 * s * s + 2 * s * s * s

    def __call__(self, x: Sequence) -> tuple:
        g = self.cutoff(x)
        if g == 0:
            return tuple(Fraction(0) for _ in x)
        return tuple(g * v for v in self.local(*x))


def bump_extension(local: VectorFieldOnBox, center: Sequence, inner, outer) -> BumpExtendedField:
    return BumpExtendedField(local, center, inner, outer)


def extended_form_value(form: DifferentialForm, fields: Sequence[BumpExtendedField], x0: Sequence):
    """Value at x0 of the form applied to globally extended fields."""
    return form.at(x0).evaluate(*[f(x0) for f in fields])
