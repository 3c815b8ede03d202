"""Seeded verification suites.

Each suite samples instances from ``random.Random(seed)`` and records one
case per checked identity.  Reports contain no timings or memory addresses,
so the same seed and sample count always yield the same JSON.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import spaces as S
from .diffeology import (_jsonable, check_linear_continuous, check_smooth_map, classes_equal, differential_matrix,
                         equivalent, is_plaque, joint_plaque_probe, locally_integrable_probe, random_poly,
                         random_rational, tangent_class, tangent_space, weaker_condition_probe, SpaceVectorField)
from .errors import IncompatibleCollection, NoPointwisePreimage, NoSpanningPlaque, TDSError, TransverseSpaceError, \
    DomainError, SchemaError
from .expr import Box, PolyExpr, SmoothMapSpec, compose
from .exterior import ExteriorForm, det, multi_index_basis, wedge_all
from .forms import DifferentialForm, VectorFieldOnBox
from .plaque_forms import (AlgebraicForm, PlaqueIndexedForm, PointwiseForm, algebraic_to_pointwise,
                           compatibility_check, axes_counterexample, inverse_along_fields, pointwise_to_algebraic, psi,
                           psi_injectivity_witness, psi_inverse_at, pullback_eps1, pullback_eps3,
                           tangent_condition_check)

SUITES = ("algebra", "forms", "def21", "tds", "psi", "counterexamples")


@dataclass
class Report:
    suite: str
    seed: int
    samples: int
    cases: list[dict] = field(default_factory=list)

    def run(self, case_id: str, check: Callable[[], object]) -> None:
        """Record ``check()``: True/False, or ``(passed, witness)``; exceptions become errors."""
        try:
            out = check()
        except (TDSError, ArithmeticError, ValueError, TypeError) as exc:
            self.cases.append({"id": case_id, "status": "error", "witness": {"error": type(exc).__name__,
                                                                            "message": str(exc)}})
            return
        passed, witness = out if isinstance(out, tuple) else (out, None)
        case = {"id": case_id, "status": "pass" if passed else "fail"}
        if witness is not None and not passed:
            case["witness"] = _jsonable(witness)
        self.cases.append(case)

    def extend(self, other: Report) -> None:
        self.cases.extend(other.cases)

    @property
    def summary(self) -> dict:
        out = {"pass": 0, "fail": 0, "error": 0}
        for c in self.cases:
            out[c["status"]] += 1
        out["total"] = len(self.cases)
        return out

    @property
    def passed(self) -> bool:
        return all(c["status"] == "pass" for c in self.cases)

    def failures(self) -> list[dict]:
        return [c for c in self.cases if c["status"] != "pass"]

    def to_json(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "samples": self.samples,
                "summary": self.summary, "cases": sorted(self.cases, key=lambda c: c["id"])}


# independent oracles

def laplace_det(matrix) -> Fraction:
    """Cofactor expansion along the first row."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    if n == 1:
        return Fraction(matrix[0][0])
    total = Fraction(0)
    for j, a in enumerate(matrix[0]):
        if a:
            minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
            total += (-1) ** j * a * laplace_det(minor)
    return total


def _sign(perm) -> int:
    return -1 if sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j]) % 2 else 1


def oracle_wedge_value(a: ExteriorForm, b: ExteriorForm, vectors) -> Fraction:
    """``sum_sigma sgn(sigma) a(v_sigma..) b(v_sigma..) / (k! l!)``."""
    k, l = a.degree, b.degree
    total = Fraction(0)
    for perm in itertools.permutations(range(k + l)):
        vs = [vectors[i] for i in perm]
        total += _sign(perm) * a.evaluate(*vs[:k]) * b.evaluate(*vs[k:])
    return total / (math.factorial(k) * math.factorial(l))


def random_exterior(rng: random.Random, dim: int, degree: int) -> ExteriorForm:
    return ExteriorForm(dim, degree, {idx: random_rational(rng) for idx in multi_index_basis(dim, degree)
                                      if rng.random() < 0.7})


def random_matrix(rng: random.Random, rows: int, cols: int) -> list[list[Fraction]]:
    return [[random_rational(rng) for _ in range(cols)] for _ in range(rows)]


def random_differential(rng: random.Random, dim: int, degree: int, coeff_degree: int = 4) -> DifferentialForm:
    return DifferentialForm(dim, degree, {idx: random_poly(rng, dim, coeff_degree, n_terms=3)
                                          for idx in multi_index_basis(dim, degree) if rng.random() < 0.7})


def random_poly_map(rng: random.Random, n_in: int, n_out: int, degree: int = 2) -> SmoothMapSpec:
    return SmoothMapSpec([random_poly(rng, n_in, degree, n_terms=3) for _ in range(n_out)], num_vars=n_in)


def _basis_vectors(dim: int, idx) -> list[list[int]]:
    return [[int(i == j) for j in range(dim)] for i in idx]


# suites

def suite_algebra(seed: int = 0, samples: int = 64) -> Report:
    rng = random.Random(seed)
    rep = Report("algebra", seed, samples)
    for k in range(samples):
        dim = rng.randint(1, 5)
        ka, kb, kc = (rng.randint(0, min(3, dim)) for _ in range(3))
        a, a2, b, c = (random_exterior(rng, dim, d) for d in (ka, ka, kb, kc))
        s = random_rational(rng)
        rep.run(f"skew-{k:04d}", lambda: a.wedge(b) == b.wedge(a) * (-1) ** (ka * kb))
        rep.run(f"assoc-{k:04d}", lambda: a.wedge(b).wedge(c) == a.wedge(b.wedge(c)))
        rep.run(f"bilinear-{k:04d}", lambda: ((a + a2 * s).wedge(b) == a.wedge(b) + a2.wedge(b) * s
                                              and b.wedge(a + a2 * s) == b.wedge(a) + b.wedge(a2) * s))
        deg = rng.randint(1, min(3, dim))
        ws = [random_exterior(rng, dim, 1) for _ in range(deg)]
        vs = [[random_rational(rng) for _ in range(dim)] for _ in range(deg)]
        rep.run(f"decomposable-{k:04d}",
                lambda: wedge_all(ws).evaluate(*vs) == laplace_det([[w.evaluate(v) for w in ws] for v in vs]))
        if ka + kb <= 4:
            def oracle(a=a, b=b, dim=dim):
                prod = a.wedge(b)
                for idx in multi_index_basis(dim, ka + kb):
                    want = oracle_wedge_value(a, b, _basis_vectors(dim, idx))
                    if prod.coeff(idx) != want:
                        return False, {"index": list(idx), "merge": prod.coeff(idx), "oracle": want}
                return True
            rep.run(f"oracle-{k:04d}", oracle)
        n = rng.randint(1, 4)
        m = random_matrix(rng, n, n)
        rep.run(f"det-{k:04d}", lambda: det(m) == laplace_det(m))
        p, q = rng.randint(1, 4), rng.randint(1, 4)
        L, M = random_matrix(rng, dim, p), random_matrix(rng, p, q)
        LM = [[sum(L[i][t] * M[t][j] for t in range(p)) for j in range(q)] for i in range(dim)]
        rep.run(f"pullback-functor-{k:04d}", lambda: a.pullback(LM) == a.pullback(L).pullback(M))
        rep.run(f"pullback-wedge-{k:04d}", lambda: a.wedge(b).pullback(L) == a.pullback(L).wedge(b.pullback(L)))
    return rep


def suite_forms(seed: int = 0, samples: int = 64) -> Report:
    rng = random.Random(seed)
    rep = Report("forms", seed, samples)
    for k in range(samples):
        dim = rng.randint(1, 4)
        ka, kb = rng.randint(0, dim), rng.randint(0, dim)
        a, b = random_differential(rng, dim, ka), random_differential(rng, dim, kb)
        rep.run(f"dd-{k:04d}", lambda: a.d().d().is_zero())
        rep.run(f"leibniz-{k:04d}", lambda: (a.wedge(b)).d() == a.d().wedge(b) + a.wedge(b.d()) * (-1) ** ka)
        if k % 2 == 0:
            n1, n2 = rng.randint(1, 3), rng.randint(1, 3)
            f = random_poly_map(rng, n1, dim)
            g = random_poly_map(rng, n2, n1)
            small = random_differential(rng, dim, min(ka, n1, n2), coeff_degree=2)
            rep.run(f"pullback-functor-{k:04d}", lambda: small.pullback(compose(f, g)) == small.pullback(f).pullback(g))
            lo = random_differential(rng, dim, min(ka, 1), coeff_degree=2)
            hi = random_differential(rng, dim, min(kb, max(n1 - 1, 0), 1), coeff_degree=2)
            rep.run(f"pullback-wedge-{k:04d}",
                    lambda: lo.wedge(hi).pullback(f) == lo.pullback(f).wedge(hi.pullback(f)))
            rep.run(f"pullback-d-{k:04d}", lambda: small.pullback(f).d() == small.d().pullback(f))
    return rep


def _ambient_form(rng: random.Random, n: int, degree: int, coeff_degree: int = 2) -> DifferentialForm:
    while True:
        w = random_differential(rng, n, degree, coeff_degree)
        if not w.is_zero():
            return w


def suite_charts(seed: int = 0, samples: int = 64) -> Report:
    """Chart-wise, bundle-section and pointwise views of a form agree on the atlas fixtures."""
    rng = random.Random(seed)
    rep = Report("def21", seed, samples)
    per = max(2, samples // 16)
    for name in ("plane2", "circle2", "sphere2"):
        space = S.make_atlas_space(name)
        atlas = space.atlas
        tol = atlas.tolerance
        coh = atlas.coherence_check(samples=8, rng=rng)
        rep.run(f"{name}-coherence", lambda: (coh.passed, [c for c in coh.cases if not c["passed"]]))
        for k in range(per):
            degree = 1 + k % atlas.dim
            W = PointwiseForm.from_differential_form(space, _ambient_form(rng, space.ambient_dim, degree))
            coll = S.chart_collection_from_pointwise(space, W)
            pts = [atlas.sample_point(rng) for _ in range(4)]
            pts += [atlas.charts[j].forward.evaluate(u, check_domain=False) for _i, j, u in atlas.overlap_samples(rng, 4)]

            def round_trip_charts(coll=coll, W=W, pts=pts):
                back = S.pointwise_from_chart_collection(space, coll, samples=8, rng=random.Random(k))
                bad = [F for F in pts if not S.forms_agree_on_manifold(space, back, W, F, tol)]
                return not bad, {"points": bad}
            rep.run(f"{name}-charts-{k:03d}", round_trip_charts)

            def round_trip_section(W=W, pts=pts):
                sec = S.section_from_pointwise(space, W)
                tr = sec.transition_check(samples=8, rng=random.Random(k))
                back = S.pointwise_from_section(space, sec, samples=8, rng=random.Random(k))
                bad = [F for F in pts if not S.forms_agree_on_manifold(space, back, W, F, tol)]
                return tr.passed and not bad, {"points": bad}
            rep.run(f"{name}-section-{k:03d}", round_trip_section)
            ind = S.chart_independence_check(space, coll, pts)
            rep.run(f"{name}-independence-{k:03d}", lambda ind=ind: (ind.passed, ind.cases))

            def corruption(coll=coll, degree=degree):
                exact = coll.forms[1].exact is not None
                delta = (DifferentialForm(atlas.dim, degree, {tuple(range(degree)): PolyExpr.constant(1, atlas.dim)})
                         if exact else ExteriorForm(atlas.dim, degree, {tuple(range(degree)): 1e-3}))
                try:
                    S.pointwise_from_chart_collection(space, coll.corrupted(1, delta), samples=8,
                                                      rng=random.Random(k))
                except IncompatibleCollection:
                    return True
                return False
            rep.run(f"{name}-incompatible-{k:03d}", corruption)
    # a local field extended by a cutoff keeps its value at the centre
    for k in range(per):
        box = Box.cube(2, 2)
        local = VectorFieldOnBox([random_poly(rng, 2, 2), random_poly(rng, 2, 2)], box)
        center = (random_rational(rng, 1, 8) / 2, random_rational(rng, 1, 8) / 2)
        ext = S.bump_extension(local, center, Fraction(1, 4), Fraction(1, 2))
        w = _ambient_form(rng, 2, 1)

        def bump(local=local, ext=ext, w=w, center=center):
            inside = (center[0] + Fraction(1, 8), center[1])
            outside = (center[0] + Fraction(3, 4), center[1])
            return (S.extended_form_value(w, [ext], center) == w.at(center).evaluate(local(*center))
                    and ext(inside) == local(*inside) and all(v == 0 for v in ext(outside)))
        rep.run(f"bump-{k:03d}", bump)

    def bump_domain():
        try:
            S.bump_extension(VectorFieldOnBox.coordinate(0, 2, Box.cube(2, 1)), (0, 0), Fraction(1, 2), 2)
        except DomainError:
            return True
        return False
    rep.run("bump-domain-error", bump_domain)
    return rep


def suite_tds(seed: int = 0, samples: int = 64) -> Report:
    rng = random.Random(seed)
    rep = Report("tds", seed, samples)
    t = PolyExpr.var(0, 1)
    r, s = PolyExpr.variables(2)
    lines, axes = S.make_lines_plane(), S.make_axes_union()
    sphere, planes = S.make_sphere_parallels(), S.make_tangent_planes()
    rep.run("lines-plaque-diagonal", lambda: is_plaque(lines, SmoothMapSpec([t, t], num_vars=1))[0])
    rep.run("lines-plaque-parabola-rejected", lambda: not is_plaque(lines, SmoothMapSpec([t, t * t], num_vars=1))[0])
    rep.run("lines-plaque-2d", lambda: is_plaque(lines, SmoothMapSpec([r + s, r * 2 + s * 2], num_vars=2))[0])
    rep.run("axes-plaque-mixed-rejected", lambda: not is_plaque(axes, SmoothMapSpec([t, t * t], num_vars=1))[0])
    origin = (Fraction(0), Fraction(0))

    def axes_origin():
        ts = tangent_space(axes, origin, rng=random.Random(seed))
        return ts.is_union_of_branches and ts.branches == {"x-axis": 1, "y-axis": 1}, ts.to_json()
    rep.run("axes-tangent-origin", axes_origin)
    rep.run("axes-tangent-off-origin", lambda: tangent_space(axes, (Fraction(1), Fraction(0))).dimension == 1)

    def axes_sum():
        p1, p2 = axes.realize(origin, (1, 0)), axes.realize(origin, (0, 1))
        return axes.add_plaques(p1, p2) is None and not joint_plaque_probe(axes, p1, p2).found
    rep.run("axes-origin-sum-unrealized", axes_sum)
    for pole in sphere.special_points():
        ts = tangent_space(sphere, pole, rng=random.Random(seed))
        rep.run(f"sphere-tangent-pole-{pole[2]:+.0f}", lambda ts=ts: ts.dimension == 2 and ts.is_union_of_branches)
    for N in (1, 2, 3):
        E = S.make_euclidean(N)
        rep.run(f"euclidean{N}-tangent", lambda E=E, N=N: tangent_space(E, E.sample_point(rng)).dimension == N)
    rep.run("planes-tangent-origin", lambda: tangent_space(planes, (Fraction(0),) * 3).dimension == 2)
    per = max(2, samples // 8)
    for name in ("euclidean:2", "euclidean:3", "lines", "tangent_planes", "atlas:plane2", "atlas:circle2",
                 "atlas:sphere2"):
        space = S.get_fixture(name)
        lc = check_linear_continuous(space, samples=per, rng=rng)
        rep.run(f"linear-continuous-{name}", lambda lc=lc: (lc.passed, [c for c in lc.cases if not c["passed"]]))
    for k in range(per):
        E = S.make_euclidean(2)
        F = E.sample_point(rng)
        v = [random_rational(rng) or Fraction(1), random_rational(rng)]
        p = E.realize(F, v)
        c = random_rational(rng) or Fraction(1, 2)
        bent = compose(p, SmoothMapSpec([t + t * t * c], num_vars=1))
        rep.run(f"equivalence-order1-{k:03d}", lambda p=p, bent=bent: equivalent(E, p, bent, 1))
        rep.run(f"equivalence-order2-{k:03d}", lambda p=p, bent=bent: not equivalent(E, p, bent, 2))
        q1, q2 = E.sample_plaque(rng, F, 1), E.sample_plaque(rng, F, 2)
        rep.run(f"euclidean-join-{k:03d}", lambda q1=q1, q2=q2: joint_plaque_probe(E, q1, q2, "weak").found)
        w1, w2 = E.sample_plaque_pair(rng, F, 1, 1)
        rep.run(f"euclidean-weaker-{k:03d}", lambda w1=w1, w2=w2: weaker_condition_probe(E, w1, w2).found)
        xi = SpaceVectorField(E, [random_poly(rng, 2, 2), random_poly(rng, 2, 2)])
        rep.run(f"euclidean-integrable-{k:03d}",
                lambda xi=xi, q1=q1: locally_integrable_probe(E, xi, q1, (Fraction(0),)).found)
    h = random_poly_map(rng, 2, 3)
    hs = check_smooth_map(h, S.make_euclidean(2), S.make_euclidean(3), samples=per, rng=rng)
    rep.run("smooth-map-euclidean", lambda: (hs.passed, hs.cases))

    def diff_linear():
        E2, E3 = S.make_euclidean(2), S.make_euclidean(3)
        F = E2.sample_point(rng)
        D = differential_matrix(h, E2, E3, F)
        v = [random_rational(rng), random_rational(rng)]
        got = tangent_class(E3, compose(h, E2.realize(F, v))).signature
        return list(got) == [sum(a * b for a, b in zip(row, v)) for row in D]
    rep.run("differential-matrix", diff_linear)
    c1, s1 = math.cos(1.0), math.sin(1.0)
    rot = SmoothMapSpec.black_box(lambda x: (c1 * x[0] - s1 * x[1], s1 * x[0] + c1 * x[1]), 2, 2,
                                  meta={"linear": [[c1, -s1], [s1, c1]]})
    rs = check_smooth_map(rot, lines, lines, samples=per, rng=rng)
    rep.run("smooth-map-lines-rotation", lambda: (rs.passed, rs.cases))
    return rep


def _tangent_vectors(space, F, rng, count: int) -> list:
    sigs = [tangent_class(space, p, check=False).signature for _l, p in space.probe_curves(F, rng, 2)]
    out = []
    for _ in range(count):
        coeffs = [random_rational(rng) for _ in sigs]
        out.append([sum(c * s[i] for c, s in zip(coeffs, sigs)) for i in range(len(sigs[0]))])
    return out


def _near_identity(rng: random.Random, n: int, radius: Fraction) -> SmoothMapSpec:
    """``r -> r + c r_a r_b e_j``: the identity to first order."""
    vs = PolyExpr.variables(n)
    j, a, b = rng.randrange(n), rng.randrange(n), rng.randrange(n)
    comps = list(vs)
    comps[j] = comps[j] + vs[a] * vs[b] * (random_rational(rng, 1) or 1)
    return SmoothMapSpec(comps, Box.cube(n, radius), num_vars=n)


def suite_psi(seed: int = 0, samples: int = 64) -> Report:
    """The map from pointwise forms to plaque-indexed forms and its inverse."""
    rng = random.Random(seed)
    rep = Report("psi", seed, samples)
    for name in ("euclidean:2", "euclidean:3", "atlas:plane2", "tangent_planes"):
        space = S.get_fixture(name)
        n = space.ambient_dim
        for k in range(samples):
            degree = 1 + k % 2
            W = PointwiseForm.from_differential_form(space, _ambient_form(rng, n, degree))
            Om = psi(space, W)
            F = space.sample_point(rng)
            vs = _tangent_vectors(space, F, rng, degree)

            def recover(Om=Om, W=W, F=F, vs=vs):
                got, want = psi_inverse_at(space, Om, F, vs, cross_check=True), W.evaluate(F, vs)
                return got == want, {"point": list(F), "got": got, "want": want}
            rep.run(f"recover-{name}-{k:03d}", recover)
            if k % 2:
                continue
            p = space.sample_plaque(rng, F, 2)
            W2 = PointwiseForm.from_differential_form(space, _ambient_form(rng, n, degree))
            f = random_poly(rng, n, 2)
            rep.run(f"linear-{name}-{k:03d}", lambda W=W, W2=W2, Om=Om, p=p: psi(space, W + W2)(p) ==
                    Om(p) + psi(space, W2)(p))
            rep.run(f"module-{name}-{k:03d}", lambda W=W, Om=Om, p=p, f=f: psi(space, W * f)(p) ==
                    Om.scaled_by(f)(p))
            phi = SmoothMapSpec([random_poly(rng, 1 + k % 2, 2, n_terms=3, zero_constant=True, bound=1)
                                 for _ in range(2)], Box.cube(1 + k % 2, Fraction(1, 64)), num_vars=1 + k % 2)
            rep.run(f"compatibility-{name}-{k:03d}",
                    lambda Om=Om, p=p, phi=phi: (lambda res: (res.passed, res.witness))(compatibility_check(Om, p, phi)))
            q1, q2 = space.sample_plaque_pair(rng, F, 2, 1)
            if k % 4:
                psi_map = _near_identity(rng, 3, Fraction(1, 64))
                q2 = compose(q1, psi_map)
                extra = [0, 0, 1]
            else:
                extra = [0, 0, 1]
            dirs = [[1, 0, 0], [0, 1, 0]][:degree]
            r0 = (Fraction(0),) * 3
            rep.run(f"tangent-condition-{name}-{k:03d}",
                    lambda Om=Om, q1=q1, q2=q2, dirs=dirs, extra=extra:
                    (lambda res: (res.passed, res.witness))(tangent_condition_check(Om, q1, r0, q2, r0, dirs, extra)))
    # spaces with transverse points
    lines = S.make_lines_plane()
    for k in range(max(2, samples // 8)):
        F = lines.sample_point(rng)
        Om = PlaqueIndexedForm.ambient_pullback(lines, _ambient_form(rng, 2, 2))

        def no_span(Om=Om, F=F):
            try:
                psi_inverse_at(lines, Om, F, [[1, 0], [0, 1]])
            except NoSpanningPlaque as exc:
                return exc.certificate["reason"].startswith("line-direction obstruction"), exc.certificate
            return False
        rep.run(f"lines-no-spanning-plaque-{k:03d}", no_span)

    def refuses():
        try:
            psi(lines, PointwiseForm.zero(lines, 1))
        except TransverseSpaceError:
            return True
        return False
    rep.run("lines-psi-refused", refuses)
    E = S.make_euclidean(2)
    for k in range(max(2, samples // 8)):
        W = PointwiseForm.from_differential_form(E, _ambient_form(rng, 2, 1))
        F = E.sample_point(rng)
        v = [[random_rational(rng), random_rational(rng)]]

        def injective(W=W, F=F, v=v):
            p = psi_injectivity_witness(E, W, F, v)
            if W.evaluate(F, v) == 0:
                return p is None
            return not psi(E, W)(p).at((Fraction(0),)).is_zero()
        rep.run(f"injectivity-{k:03d}", injective)
        xi = SpaceVectorField(E, [random_poly(rng, 2, 2), random_poly(rng, 2, 2)])
        p = E.sample_plaque(rng, F, 1)

        def smooth_inverse(W=W, xi=xi, p=p):
            got = inverse_along_fields(E, psi(E, W), [xi], p)
            comps = list(p.components)
            want = sum((W.coeffs.get((i,), PolyExpr.zero(2)).substitute(comps) * c.substitute(comps)
                        for i, c in enumerate(xi.components)), PolyExpr.zero(1))
            return got == want, {"got": str(got), "want": str(want)}
        rep.run(f"inverse-smooth-{k:03d}", smooth_inverse)
        E3 = S.make_euclidean(3)
        h = random_poly_map(rng, 2, 3)
        W3 = PointwiseForm.from_differential_form(E3, _ambient_form(rng, 3, 1 + k % 2))
        q = E.sample_plaque(rng, F, 2)
        rep.run(f"pullbacks-commute-{k:03d}", lambda h=h, W3=W3, q=q: psi(E, pullback_eps1(h, W3, E, samples=0))(q) ==
                pullback_eps3(h, psi(E3, W3), E, samples=0)(q))
    rep.extend(suite_free_module(rng, seed, samples))
    return rep


def suite_free_module(rng: random.Random, seed: int, samples: int) -> Report:
    """On R^N every algebraic form is determined by its values on the coordinate fields."""
    rep = Report("free-module", seed, samples)
    for N in (1, 2, 3):
        E = S.make_euclidean(N)
        basis = E.field_basis()
        for k in range(max(4, samples // 4)):
            degree = 1 if N == 1 else 1 + k % 2
            values = {idx: random_poly(rng, N, 2) for idx in multi_index_basis(N, degree)}
            alg = AlgebraicForm(E, degree, basis_values=values)
            fields = [SpaceVectorField(E, [random_poly(rng, N, 2) for _ in range(N)]) for _ in range(degree)]

            def law(alg=alg, fields=fields, values=values, degree=degree):
                from .forms import poly_det
                want = PolyExpr.zero(N)
                for idx, h in values.items():
                    want = want + h * poly_det([[f.components[i] for i in idx] for f in fields], N)
                return alg(*fields) == want
            rep.run(f"law-R{N}-{k:03d}", law)

            def unique(alg=alg, values=values, fields=fields):
                pts = [E.sample_point(rng) for _ in range(4)]
                pt = algebraic_to_pointwise(alg, pts)
                for F in pts:
                    for idx, h in values.items():
                        if pt.at(F).evaluate(*_basis_vectors(N, idx)) != h.evaluate(F):
                            return False, {"point": list(F), "index": list(idx)}
                return pointwise_to_algebraic(pt)(*fields) == alg(*fields)
            rep.run(f"unique-R{N}-{k:03d}", unique)
            rep.run(f"basis-R{N}-{k:03d}", lambda alg=alg, values=values, degree=degree: all(
                alg(*[basis[i] for i in idx]) == h for idx, h in values.items()))
    return rep


def suite_counterexamples(seed: int = 0, samples: int = 64) -> Report:
    rng = random.Random(seed)
    rep = Report("counterexamples", seed, samples)
    omega, ev = axes_counterexample()
    rep.run("axes-value-at-origin", lambda: ev["omega_xi1_at_origin"] == 1)
    rep.run("axes-value-at-(1,0)", lambda: ev["omega_xi1_at_(1,0)"] == 2)
    rep.run("axes-zero-signature", lambda: all(v == 0 for v in ev["xi1_signature_at_origin"]))
    rep.run("axes-no-pointwise-preimage", lambda: ev["pointwise_value_forced"] == 0 and not ev["has_pointwise_preimage"])

    def axes_converter():
        try:
            algebraic_to_pointwise(omega)
        except NoPointwisePreimage:
            return True
        return False
    rep.run("axes-converter-refuses", axes_converter)
    # lines plane: independent line directions never join
    lines = S.make_lines_plane()
    for k in range(max(20, samples // 2)):
        F = lines.sample_point(rng)
        while True:
            d1 = [random_rational(rng), random_rational(rng)]
            d2 = [random_rational(rng), random_rational(rng)]
            if d1[0] * d2[1] - d1[1] * d2[0] != 0:
                break
        p1, p2 = lines.realize(F, d1), lines.realize(F, d2)

        def lines_probe(p1=p1, p2=p2):
            res = joint_plaque_probe(lines, p1, p2, "strong")
            cert = res.certificate
            return (not res.found and cert["reason"].startswith("line-direction obstruction")
                    and cert["degree"] == [1, 1] and cert["determinant"] != 0), res.to_json()
        rep.run(f"lines-transverse-{k:03d}", lines_probe)
    fields = [SpaceVectorField(lines, [PolyExpr.zero(2), PolyExpr.zero(2)], name="zero")]
    for k in range(max(8, samples // 4)):
        fields.append(SpaceVectorField(lines, [random_poly(rng, 2, 2), random_poly(rng, 2, 2)], name=f"f{k}"))
    pts = [lines.sample_point(rng) for _ in range(3)]
    for k, xi in enumerate(fields):
        def lines_field(xi=xi):
            integrable = all(locally_integrable_probe(lines, xi, q, (Fraction(0),)).found
                             for F in pts for q in lines.integrability_test_plaques(xi, F))
            is_zero = all(c.is_zero() for c in xi.components)
            return integrable == is_zero, {"field": repr(xi), "integrable": integrable}
        rep.run(f"lines-field-{k:03d}", lines_field)
    # meridian sphere
    sphere = S.make_sphere_parallels()
    for pole in sphere.special_points():
        a, b = sphere.realize(pole, (1.0, 0.0, 0.0)), sphere.realize(pole, (0.0, 1.0, 0.0))

        def meridian_pole(a=a, b=b):
            res = joint_plaque_probe(sphere, a, b, "strong")
            return (not res.found and res.certificate["reason"].startswith("meridian-plane obstruction")), res.to_json()
        rep.run(f"meridian-pole-{pole[2]:+.0f}", meridian_pole)
    W = sphere.meridian_field(PolyExpr.variables(3)[0] + 2)
    for k in range(max(10, samples // 4)):
        F = sphere.sample_point(rng)
        lam, a0 = sphere.coords(F)
        e = sphere.frame(lam, a0)
        rep.run(f"meridian-nonpole-join-{k:03d}", lambda F=F, e=e: joint_plaque_probe(
            sphere, sphere.realize(F, e), sphere.realize(F, [2 * c for c in e]), "strong").found)
        rep.run(f"meridian-field-integrable-{k:03d}", lambda F=F: all(
            locally_integrable_probe(sphere, W, q, (Fraction(0),)).found
            for q in sphere.integrability_test_plaques(W, F)))
    rep.run("meridian-field-zero-at-poles-integrable", lambda: all(
        locally_integrable_probe(sphere, W, q, (Fraction(0),)).found
        for P in sphere.special_points() for q in sphere.integrability_test_plaques(W, P)))

    def pole_field(F):
        x, y, z = (float(c) for c in F)
        if math.hypot(x, y) < 1e-12:
            return (1.0, 0.0, 0.0)
        return tuple(float(c) for c in W.velocity(F))
    bad = SpaceVectorField(sphere, rule=pole_field, name="nonzero-at-pole")
    rep.run("meridian-field-nonzero-at-pole-fails", lambda: not all(
        locally_integrable_probe(sphere, bad, q, (Fraction(0),)).found
        for q in sphere.integrability_test_plaques(bad, sphere.special_points()[0])))
    # tangent planes
    planes = S.make_tangent_planes()
    O = (Fraction(0),) * 3
    t = PolyExpr.var(0, 1)
    flat = SmoothMapSpec(planes.lift(0, t, PolyExpr.zero(1)), num_vars=1)
    curved = SmoothMapSpec(planes.lift(1, PolyExpr.zero(1), t), num_vars=1)
    rep.run("planes-origin-strong-join", lambda: joint_plaque_probe(planes, flat, curved, "strong").found)
    rep.run("planes-origin-weak-obstructed", lambda: not joint_plaque_probe(planes, flat, curved, "weak").found)
    for k in range(max(4, samples // 8)):
        m = random_poly(rng, 3, 1)
        for xi in planes.tangent_fields(m):
            rep.run(f"planes-field-{xi.name}-{k:03d}", lambda xi=xi: planes.field_is_tangent(xi) and all(
                locally_integrable_probe(planes, xi, p, (Fraction(0),)).found
                for F in (O, planes.sample_point(rng)) for _l, p in planes.probe_curves(F, rng, 2)))
    return rep


RUNNERS = {"algebra": suite_algebra, "forms": suite_forms, "def21": suite_charts, "tds": suite_tds,
           "psi": suite_psi, "counterexamples": suite_counterexamples}


def run_suite(name: str, seed: int = 0, samples: int = 64) -> Report:
    if name == "all":
        rep = Report("all", seed, samples)
        for suite in SUITES:
            sub = RUNNERS[suite](seed, samples)
            for c in sub.cases:
                rep.cases.append({**c, "id": f"{suite}/{c['id']}"})
        return rep
    if name not in RUNNERS:
        raise SchemaError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    return RUNNERS[name](seed, samples)
