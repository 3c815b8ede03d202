"""Diffeological spaces with the standard tangent structure of a function algebra.

A space lives inside some R^N.  It decides which maps are plaques, and it
carries a finite list of generator polynomials ``f_1..f_m``; two plaques at
F are equivalent when every ``f_j o p`` has the same jet at 0.  A tangent
vector is represented by its *signature*, the first derivatives
``d/dt (f_j o p)(0)``.

Fixtures (see :mod:`tdsforms.spaces`) subclass :class:`DiffSpace` and
supply the geometric constructors the probes below rely on: joint plaques,
integral plaques of vector fields, and obstruction certificates when those
cannot exist.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import (BaseMismatch, DimensionError, DomainError, FixtureError, NotAMember,
                     NotAPlaque, NotATangentVector)
from .expr import (Box, PolyExpr, SmoothMapSpec, as_rational, compose, jacobian, jacobian_at_zero,
                   jet_at_zero, values_close)

TOL = 1e-6


# numeric helpers

def random_rational(rng: random.Random, bound: int = 3, den: int = 4) -> Fraction:
    return Fraction(rng.randint(-bound * den, bound * den), den)


def random_poly(rng: random.Random, num_vars: int, degree: int, n_terms: int = 4,
                zero_constant: bool = False, bound: int = 2) -> PolyExpr:
    terms = {}
    for _ in range(n_terms):
        exp = [0] * num_vars
        for _ in range(rng.randint(0, degree)):
            if num_vars:
                exp[rng.randrange(num_vars)] += 1
        if zero_constant and not any(exp):
            continue
        terms[tuple(exp)] = random_rational(rng, bound)
    return PolyExpr(num_vars, terms)


def points_close(a: Sequence, b: Sequence, tol: float = TOL) -> bool:
    return len(a) == len(b) and all(values_close(x, y, tol) for x, y in zip(a, b))


def independent_rows(vectors: Sequence[Sequence], tol: float = 1e-9) -> list[list]:
    """A maximal linearly independent subset, by row reduction."""
    basis: list[list] = []
    reduced: list[tuple[int, list]] = []
    for v in vectors:
        w = list(v)
        for pivot, row in reduced:
            if w[pivot]:
                factor = w[pivot] / row[pivot]
                w = [a - factor * b for a, b in zip(w, row)]
        pivot = next((i for i, a in enumerate(w) if abs(a) > (tol if isinstance(a, float) else 0)), None)
        if pivot is not None:
            reduced.append((pivot, w))
            basis.append(list(v))
    return basis


def rank(vectors: Sequence[Sequence], tol: float = 1e-9) -> int:
    return len(independent_rows(vectors, tol))


# map plumbing

def fix_arguments(m: SmoothMapSpec, fixed: dict[int, object]) -> SmoothMapSpec:
    """The map of the remaining variables obtained by freezing some arguments."""
    n = m.num_vars
    free = [i for i in range(n) if i not in fixed]
    rows, offset = [], []
    for i in range(n):
        row = [0] * len(free)
        if i in fixed:
            offset.append(fixed[i])
        else:
            row[free.index(i)] = 1
            offset.append(0)
        rows.append(row)
    lo = tuple(m.domain.lo[i] for i in free)
    hi = tuple(m.domain.hi[i] for i in free)
    if any(isinstance(v, float) for v in offset) and m.is_polynomial:
        raise TypeError("cannot freeze a polynomial map at a float")
    emb = SmoothMapSpec.affine(rows, offset, Box(lo, hi), num_vars=len(free)) if \
        all(not isinstance(v, float) for v in offset) else _float_affine(rows, offset, Box(lo, hi))
    return compose(m, emb)


def _float_affine(rows, offset, domain: Box) -> SmoothMapSpec:
    def f(x):
        return tuple(b + sum(a * xi for a, xi in zip(row, x)) for row, b in zip(rows, offset))
    return SmoothMapSpec.black_box(f, domain.dim, len(rows), domain)


def line_through(p: SmoothMapSpec, r0: Sequence, direction: Sequence) -> SmoothMapSpec:
    """The curve ``t -> p(r0 + t v)`` on an interval around 0 staying in ``p.domain``."""
    radius = None
    for c, v, lo, hi in zip(r0, direction, p.domain.lo, p.domain.hi):
        if v:
            for bound in (lo, hi):
                if bound in (float("inf"), float("-inf")):
                    continue
                reach = abs((bound - c) / v)
                radius = reach if radius is None else min(radius, reach)
    domain = Box.whole(1) if radius is None else Box.cube(1, radius)
    rows = [[v] for v in direction]
    if all(not isinstance(v, float) for v in list(r0) + list(direction)):
        emb = SmoothMapSpec.affine(rows, list(r0), domain, num_vars=1)
    else:
        emb = _float_affine(rows, list(r0), domain)
    return compose(p, emb)


def embed_polynomial(p: SmoothMapSpec, num_vars: int, positions: Sequence[int]) -> list[PolyExpr]:
    return [c.embed(num_vars, positions) for c in p.components]


def maps_agree(a: SmoothMapSpec, b: SmoothMapSpec, samples: Sequence[Sequence] | None = None,
               tol: float = TOL) -> bool:
    """Equality as maps: exact for polynomials, sampled otherwise."""
    if a.num_vars != b.num_vars or a.codim != b.codim:
        return False
    if a.is_polynomial and b.is_polynomial:
        return a.components == b.components
    if samples is None:
        samples = sample_domain_points(a.domain, a.num_vars, b.domain)
    return all(points_close(a.evaluate(s, check_domain=False), b.evaluate(s, check_domain=False), tol)
               for s in samples)


def sample_domain_points(domain: Box, n: int, other: Box | None = None, count: int = 7) -> list[tuple]:
    """Deterministic points near the origin inside ``domain`` (and ``other``)."""
    radius = Fraction(1, 2)
    for box in (domain, other):
        if box is None:
            continue
        for lo, hi in zip(box.lo, box.hi):
            for bound in (lo, hi):
                if abs(bound) != float("inf"):
                    radius = min(radius, abs(Fraction(bound)) / 2 if not isinstance(bound, float)
                                 else Fraction(abs(bound) / 2))
    pts = [tuple(Fraction(0) for _ in range(n))]
    fracs = [Fraction(1), Fraction(-1, 2), Fraction(1, 3), Fraction(-3, 4), Fraction(2, 3), Fraction(-1)]
    for k in range(count - 1):
        pts.append(tuple(radius * fracs[(k + i) % len(fracs)] for i in range(n)))
    return pts


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent class at ``base``, stored by its generator signature."""

    base: tuple
    signature: tuple
    witness: SmoothMapSpec | None = None

    def is_zero(self, tol: float = TOL) -> bool:
        return all(values_close(v, 0, tol) for v in self.signature)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TangentVector):
            return NotImplemented
        return points_close(self.base, other.base) and points_close(self.signature, other.signature)

    __hash__ = None

    def __add__(self, other: TangentVector) -> TangentVector:
        if not points_close(self.base, other.base):
            raise BaseMismatch("tangent vectors live at different points")
        return TangentVector(self.base, tuple(a + b for a, b in zip(self.signature, other.signature)))

    def __mul__(self, c) -> TangentVector:
        return TangentVector(self.base, tuple(v * c for v in self.signature))

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"base": [_num_json(v) for v in self.base],
                "signature": [_num_json(v) for v in self.signature]}


def _num_json(v):
    if isinstance(v, float):
        return v
    v = as_rational(v)
    return {"num": v.numerator, "den": v.denominator}


@dataclass
class ProbeResult:
    found: bool
    plaque: SmoothMapSpec | None = None
    strategy: str | None = None
    mode: str | None = None
    certificate: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.found

    def to_json(self) -> dict:
        out: dict = {"found": self.found, "mode": self.mode, "strategy": self.strategy}
        if self.plaque is not None:
            out["plaque"] = self.plaque.to_json() if self.plaque.is_polynomial else repr(self.plaque)
        if self.certificate:
            out["certificate"] = _jsonable(self.certificate)
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return _num_json(obj)
    if isinstance(obj, float):
        return round(obj, 12)
    return obj


@dataclass
class CheckReport:
    name: str
    cases: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.cases)

    def add(self, case_id: str, passed: bool, **detail):
        self.cases.append({"id": case_id, "passed": bool(passed), **detail})

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "cases": _jsonable(self.cases)}


@dataclass
class TangentSpaceReport:
    point: tuple
    dimension: int
    basis: list
    branches: dict
    is_union_of_branches: bool

    def to_json(self) -> dict:
        return _jsonable({"point": list(self.point), "dimension": self.dimension,
                          "basis": self.basis, "branches": self.branches,
                          "is_union_of_branches": self.is_union_of_branches})


class DiffSpace:
    """A diffeological space inside R^N with the standard tangent structure
    defined by ``generators``.

    Subclasses override the fixture hooks (``plaque_rule``, ``realize``,
    ``join_candidates`` ...).  Plaque domains are boxes around 0 and a plaque
    "at F" satisfies ``p(0) = F``.
    """

    kind = "generic"
    non_transverse = False

    def __init__(self, ambient_dim: int, generators: Sequence[PolyExpr] | None = None, name: str | None = None):
        self.ambient_dim = ambient_dim
        if generators is None:
            generators = PolyExpr.variables(ambient_dim)
        self.generators = tuple(generators)
        if any(g.num_vars != ambient_dim for g in self.generators):
            raise DimensionError("generators must be polynomials on the ambient space")
        self.name = name or self.kind
        self.generator_map = SmoothMapSpec(self.generators, num_vars=ambient_dim)

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    @property
    def coordinate_generators(self) -> bool:
        return list(self.generators) == PolyExpr.variables(self.ambient_dim)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"

    # fixture hooks

    def membership(self, point: Sequence) -> str | None:
        """Branch label of a member point, ``None`` for non-members."""
        return "main"

    def plaque_rule(self, m: SmoothMapSpec) -> tuple[bool, str]:
        return True, ""

    def realize(self, base: Sequence, velocity: Sequence) -> SmoothMapSpec:
        """A 1-plaque at ``base`` whose ambient velocity at 0 is ``velocity``."""
        p = SmoothMapSpec.affine([[v] for v in velocity], list(base), num_vars=1)
        ok, why = self.plaque_rule(p)
        if not ok:
            raise NotATangentVector(f"{tuple(velocity)} is not tangent to {self.name} at {tuple(base)}: {why}")
        return p

    def probe_curves(self, base: Sequence, rng: random.Random, budget: int) -> list[tuple[str, SmoothMapSpec]]:
        out = []
        for k in range(budget):
            v = [random_rational(rng) for _ in range(self.ambient_dim)]
            if k < self.ambient_dim:
                v = [Fraction(int(i == k)) for i in range(self.ambient_dim)]
            try:
                out.append((self.membership(base) or "main", self.realize(base, v)))
            except NotATangentVector:
                continue
        return out

    def join_candidates(self, p1: SmoothMapSpec, p2: SmoothMapSpec) -> list[tuple[str, SmoothMapSpec]]:
        return []

    def join_obstruction(self, p1: SmoothMapSpec, p2: SmoothMapSpec, mode: str) -> dict | None:
        return None

    def weaker_candidates(self, p1: SmoothMapSpec, p2: SmoothMapSpec) -> list[tuple[str, SmoothMapSpec]]:
        return []

    def weaker_obstruction(self, p1: SmoothMapSpec, p2: SmoothMapSpec) -> dict | None:
        return None

    def integrate_candidates(self, field: SpaceVectorField, p: SmoothMapSpec) -> list[tuple[str, SmoothMapSpec]]:
        """Default: ``q(r, t) = p(r) + t * field(p(r))`` for polynomial data."""
        if p.is_polynomial and field.components is not None:
            n = p.num_vars
            comps = embed_polynomial(p, n + 1, range(n))
            t = PolyExpr.var(n, n + 1)
            pulled = [c.substitute(comps) for c in field.components]
            q = SmoothMapSpec([a + t * b for a, b in zip(comps, pulled)],
                              Box(p.domain.lo + (float("-inf"),), p.domain.hi + (float("inf"),)),
                              num_vars=n + 1)
            return [("ambient-flow", q)]
        return []

    def integrability_obstruction(self, field: SpaceVectorField, p: SmoothMapSpec, r0: Sequence) -> dict | None:
        return None

    def add_plaques(self, p1: SmoothMapSpec, p2: SmoothMapSpec) -> SmoothMapSpec | None:
        """A plaque in the class ``[p1] + [p2]`` (same dimension, same base)."""
        if not (p1.is_polynomial and p2.is_polynomial):
            return None
        base = p1.evaluate((Fraction(0),) * p1.num_vars, check_domain=False)
        comps = [a + b - c for a, b, c in zip(p1.components, p2.components, base)]
        return SmoothMapSpec(comps, p1.domain, num_vars=p1.num_vars)

    def scale_plaque(self, c, p: SmoothMapSpec) -> SmoothMapSpec:
        n = p.num_vars
        return compose(p, SmoothMapSpec.affine([[c if i == j else 0 for j in range(n)] for i in range(n)],
                                               num_vars=n))

    def sum_along(self, p1: SmoothMapSpec, p2: SmoothMapSpec, n: int) -> SmoothMapSpec | None:
        """A plaque with s-classes ``[p1(r, s)]_s + [p2(r, s)]_s`` for each r."""
        if not (p1.is_polynomial and p2.is_polynomial):
            return None
        total = p1.num_vars
        zero_s = {i: 0 for i in range(n, total)}
        base = [c.fix(zero_s).embed(total, range(n)) for c in p1.components]
        comps = [a + b - c for a, b, c in zip(p1.components, p2.components, base)]
        return SmoothMapSpec(comps, p1.domain, num_vars=total)

    def join_along(self, p: SmoothMapSpec, qs: Sequence[SmoothMapSpec]) -> SmoothMapSpec | None:
        """An (n+k)-plaque ``q(r, t)`` with ``q(r, 0) = p(r)`` whose ``t_i``-slices
        are the (n+1)-plaques ``qs[i]`` to first order."""
        if not (p.is_polynomial and all(q.is_polynomial for q in qs)):
            return None
        n, k = p.num_vars, len(qs)
        base = embed_polynomial(p, n + k, range(n))
        comps = list(base)
        for i, q in enumerate(qs):
            lifted = embed_polynomial(q, n + k, list(range(n)) + [n + i])
            comps = [c + a - b for c, a, b in zip(comps, lifted, base)]
        return SmoothMapSpec(comps, num_vars=n + k)

    def sample_point(self, rng: random.Random) -> tuple:
        return tuple(random_rational(rng) for _ in range(self.ambient_dim))

    def sample_plaque(self, rng: random.Random, base: Sequence, dim: int) -> SmoothMapSpec:
        comps = [random_poly(rng, dim, 2, zero_constant=True) + b for b in base]
        return SmoothMapSpec(comps, num_vars=dim)

    def sample_plaque_pair(self, rng: random.Random, base: Sequence, n: int, m: int):
        shared = self.sample_plaque(rng, base, n)
        r_part = embed_polynomial(shared, n + m, range(n))
        s_vars = PolyExpr.variables(n + m)[n:]
        out = []
        for _ in range(2):
            extra = []
            for _c in range(self.ambient_dim):
                e = PolyExpr.zero(n + m)
                for s in s_vars:
                    e = e + s * random_poly(rng, n + m, 1)
                extra.append(e)
            out.append(SmoothMapSpec([a + b for a, b in zip(r_part, extra)], num_vars=n + m))
        return out[0], out[1]

    def functions_equal(self, f: PolyExpr, g: PolyExpr) -> bool:
        """Equality of two ambient polynomials as functions on the space."""
        return f == g

    def field_basis(self) -> list[SpaceVectorField]:
        raise FixtureError(f"{self.name} does not document a spanning family of vector fields")

    def decompose_field(self, xi: SpaceVectorField) -> list[PolyExpr]:
        raise FixtureError(f"{self.name} does not document a field decomposition")

    def field_is_tangent(self, xi: SpaceVectorField) -> bool:
        return True

    def to_json(self) -> dict:
        return {"ambient": self.ambient_dim, "kind": self.kind, "name": self.name,
                "generators": [str(g) for g in self.generators]}


class SpaceVectorField:
    """A section ``F -> T_F X``.

    Given either by ambient polynomial components (a field on R^N whose
    restriction is tangent to the space) or by a rule returning the ambient
    velocity at each member point.  The tangent class at F is realized by the
    space's witness 1-plaque with that velocity.
    """

    def __init__(self, space: DiffSpace, components: Sequence[PolyExpr] | None = None,
                 rule: Callable | None = None, name: str = "field"):
        if components is None and rule is None:
            raise ValueError("a vector field needs components or a rule")
        if components is not None:
            components = tuple(components)
            if len(components) != space.ambient_dim or any(c.num_vars != space.ambient_dim for c in components):
                raise DimensionError("field components must be ambient polynomials")
        self.space = space
        self.components = components
        self.rule = rule
        self.name = name

    @classmethod
    def from_strings(cls, space: DiffSpace, texts: Sequence[str], name: str = "field") -> SpaceVectorField:
        from .expr import parse_expr
        return cls(space, [parse_expr(t, space.ambient_dim) for t in texts], name=name)

    def velocity(self, point: Sequence) -> tuple:
        if self.rule is not None:
            return tuple(self.rule(tuple(point)))
        return tuple(c.evaluate(point) for c in self.components)

    def at(self, point: Sequence) -> TangentVector:
        if self.space.membership(point) is None:
            raise NotAMember(f"{tuple(point)} is not a point of {self.space.name}")
        witness = self.space.realize(point, self.velocity(point))
        return tangent_class(self.space, witness, check=False)

    def __mul__(self, f: PolyExpr) -> SpaceVectorField:
        if self.components is None:
            return NotImplemented
        return SpaceVectorField(self.space, [c * f for c in self.components], name=f"{self.name}*f")

    __rmul__ = __mul__

    def __add__(self, other: SpaceVectorField) -> SpaceVectorField:
        return SpaceVectorField(self.space, [a + b for a, b in zip(self.components, other.components)],
                                name=f"{self.name}+{other.name}")

    def __repr__(self) -> str:
        if self.components is not None:
            return f"SpaceVectorField({[str(c) for c in self.components]})"
        return f"SpaceVectorField(<rule {self.name}>)"


# operations

def is_plaque(space: DiffSpace, m: SmoothMapSpec) -> tuple[bool, str]:
    if m.codim != space.ambient_dim:
        raise DimensionError(f"map lands in R^{m.codim}, space lives in R^{space.ambient_dim}")
    ok, why = space.plaque_rule(m)
    if not ok:
        return False, why
    for pt in sample_domain_points(m.domain, m.num_vars, count=3):
        try:
            value = m.evaluate(pt)
        except DomainError:
            continue
        if space.membership(value) is None:
            return False, f"image point {value} is not a member"
    return True, ""


def require_plaque(space: DiffSpace, m: SmoothMapSpec) -> None:
    ok, why = is_plaque(space, m)
    if not ok:
        raise NotAPlaque(why)


def signature_matrix(space: DiffSpace, p: SmoothMapSpec) -> list[list]:
    """First jet of ``G o p`` at 0: one row per generator, one column per plaque variable."""
    if space.coordinate_generators:
        return jacobian_at_zero(p)
    return jacobian_at_zero(compose(space.generator_map, p))


def base_point(p: SmoothMapSpec) -> tuple:
    return p.evaluate(tuple(Fraction(0) for _ in range(p.num_vars)))


def tangent_class(space: DiffSpace, p: SmoothMapSpec, check: bool = True) -> TangentVector:
    if p.num_vars != 1:
        raise DimensionError("tangent vectors are classes of 1-plaques")
    if check:
        require_plaque(space, p)
    base = base_point(p)
    if space.membership(base) is None:
        raise NotAMember(f"{base} is not a point of {space.name}")
    sig = tuple(row[0] for row in signature_matrix(space, p))
    return TangentVector(base, sig, p)


def classes_equal(space: DiffSpace, p1: SmoothMapSpec, p2: SmoothMapSpec, tol: float = TOL) -> bool:
    """``[p1] == [p2]`` as n-plaques: same base and same first jet of every generator."""
    if p1.num_vars != p2.num_vars:
        return False
    if not points_close(base_point(p1), base_point(p2), tol):
        return False
    a, b = signature_matrix(space, p1), signature_matrix(space, p2)
    return all(points_close(r1, r2, tol) for r1, r2 in zip(a, b))


def equivalent(space: DiffSpace, p1: SmoothMapSpec, p2: SmoothMapSpec, order: int = 1,
               tol: float = TOL) -> bool:
    if not points_close(base_point(p1), base_point(p2), tol):
        raise BaseMismatch("plaques are based at different points")
    if p1.num_vars != p2.num_vars:
        return False
    g = space.generator_map
    j1 = jet_at_zero(compose(g, p1), order)
    j2 = jet_at_zero(compose(g, p2), order)
    return j1.agrees_with(j2, tol)


def tangent_space(space: DiffSpace, point: Sequence, budget: int = 8,
                  rng: random.Random | None = None) -> TangentSpaceReport:
    if space.membership(point) is None:
        raise NotAMember(f"{tuple(point)} is not a point of {space.name}")
    rng = rng or random.Random(0)
    by_branch: dict[str, list] = {}
    for label, curve in space.probe_curves(point, rng, budget):
        by_branch.setdefault(label, []).append(tangent_class(space, curve).signature)
    all_sigs = [s for sigs in by_branch.values() for s in sigs]
    basis = independent_rows(all_sigs)
    branches = {label: rank(sigs) for label, sigs in sorted(by_branch.items())}
    union = len(branches) > 1 and max(branches.values(), default=0) < len(basis)
    return TangentSpaceReport(tuple(point), len(basis), basis, branches, union)


def _split_join(q: SmoothMapSpec, n: int, m: int) -> tuple[SmoothMapSpec, SmoothMapSpec]:
    first = fix_arguments(q, {i: Fraction(0) for i in range(n, n + m)})
    second = fix_arguments(q, {i: Fraction(0) for i in range(n)})
    return first, second


def verify_join(space: DiffSpace, q: SmoothMapSpec, p1: SmoothMapSpec, p2: SmoothMapSpec,
                mode: str) -> tuple[bool, str]:
    """Check that ``q`` extends ``p1`` and ``p2``: pointwise in weak mode, classwise in strong mode."""
    n, m = p1.num_vars, p2.num_vars
    if q.num_vars != n + m:
        return False, "joint plaque has the wrong dimension"
    ok, why = is_plaque(space, q)
    if not ok:
        return False, f"candidate is not a plaque: {why}"
    a, b = _split_join(q, n, m)
    if mode == "weak":
        if not maps_agree(a, p1):
            return False, "q(r, 0) differs from p1(r)"
        if not maps_agree(b, p2):
            return False, "q(0, s) differs from p2(s)"
    else:
        if not classes_equal(space, a, p1):
            return False, "[q(r, 0)] differs from [p1]"
        if not classes_equal(space, b, p2):
            return False, "[q(0, s)] differs from [p2]"
    return True, ""


def _generic_join_candidates(space: DiffSpace, p1: SmoothMapSpec, p2: SmoothMapSpec):
    n, m = p1.num_vars, p2.num_vars
    out = []
    if p1.is_polynomial and p2.is_polynomial:
        a = embed_polynomial(p1, n + m, range(n))
        b = embed_polynomial(p2, n + m, range(n, n + m))
        base = base_point(p1)
        out.append(("additive", SmoothMapSpec([x + y - c for x, y, c in zip(a, b, base)], num_vars=n + m)))
        out.append(("first-only", SmoothMapSpec(a, num_vars=n + m)))
        out.append(("second-only", SmoothMapSpec(b, num_vars=n + m)))
    return out


def joint_plaque_probe(space: DiffSpace, p1: SmoothMapSpec, p2: SmoothMapSpec, mode: str = "strong",
                       budget: int = 8) -> ProbeResult:
    """Search for an (n+m)-plaque extending an n-plaque and an m-plaque at F.

    ``mode="weak"`` demands ``q(r,0)=p1(r)`` and ``q(0,s)=p2(s)``; its failure
    witnesses a weakly transverse point.  ``mode="strong"`` only demands equal
    classes, so its failure witnesses a strongly transverse point.
    """
    if mode not in ("strong", "weak"):
        raise ValueError("mode must be 'strong' or 'weak'")
    base = base_point(p1)
    if not points_close(base, base_point(p2)):
        raise BaseMismatch("plaques are based at different points")
    candidates = space.join_candidates(p1, p2) + _generic_join_candidates(space, p1, p2)
    rejections = []
    for strategy, q in candidates[:budget]:
        ok, why = verify_join(space, q, p1, p2, mode)
        if ok:
            return ProbeResult(True, q, strategy, mode)
        rejections.append({"strategy": strategy, "reason": why})
    cert = space.join_obstruction(p1, p2, mode) or {"reason": "no candidate joint plaque verified"}
    cert = {**cert, "transverse": mode, "degree": [p1.num_vars, p2.num_vars], "point": list(base),
            "rejections": rejections}
    return ProbeResult(False, None, None, mode, cert)


def _s_derivative(space: DiffSpace, p: SmoothMapSpec, var: int, zero_vars: Sequence[int]) -> list[PolyExpr]:
    g = compose(space.generator_map, p)
    fixed = {i: 0 for i in zero_vars}
    return [c.partial(var).fix(fixed) for c in g.components]


def weaker_condition_probe(space: DiffSpace, p1: SmoothMapSpec, p2: SmoothMapSpec,
                           budget: int = 8) -> ProbeResult:
    """Search for an (n+2)-plaque ``q(r, t1, t2)`` whose t1- and t2-classes
    match those of two (n+1)-plaques sharing ``p1(r, 0) = p2(r, 0)``."""
    if p1.num_vars != p2.num_vars:
        raise DimensionError("both plaques must have the same dimension")
    n = p1.num_vars - 1
    if not (p1.is_polynomial and p2.is_polynomial):
        raise TypeError("weaker_condition_probe works on polynomial plaques")
    b1 = fix_arguments(p1, {n: 0})
    b2 = fix_arguments(p2, {n: 0})
    if not maps_agree(b1, b2):
        raise DomainError("plaques do not agree at s = 0")
    a = embed_polynomial(p1, n + 2, list(range(n)) + [n])
    b = embed_polynomial(p2, n + 2, list(range(n)) + [n + 1])
    base = embed_polynomial(b1, n + 2, range(n))
    candidates = list(space.weaker_candidates(p1, p2))
    candidates.append(("additive", SmoothMapSpec([x + y - c for x, y, c in zip(a, b, base)], num_vars=n + 2)))
    if p1.components == p2.components:
        shifted = SmoothMapSpec.affine(
            [[int(i == j) for j in range(n)] + [0, 0] for i in range(n)] + [[0] * n + [1, 1]], num_vars=n + 2)
        candidates.append(("reparameterized", compose(p1.restrict(Box.whole(n + 1)), shifted)))
    want1 = [c.embed(n + 2, range(n)) for c in _s_derivative(space, p1, n, [n])]
    want2 = [c.embed(n + 2, range(n)) for c in _s_derivative(space, p2, n, [n])]
    rejections = []
    for strategy, q in candidates[:budget]:
        ok, why = is_plaque(space, q)
        if ok:
            qb = [c.fix({n: 0, n + 1: 0}) for c in q.components]
            if qb != list(b1.components):
                ok, why = False, "q(r, 0, 0) differs from p1(r, 0)"
        if ok:
            got1 = [c.embed(n + 2, range(n)) for c in _s_derivative(space, q, n, [n, n + 1])]
            got2 = [c.embed(n + 2, range(n)) for c in _s_derivative(space, q, n + 1, [n, n + 1])]
            if got1 != want1 or got2 != want2:
                ok, why = False, "t-classes do not match"
        if ok:
            return ProbeResult(True, q, strategy, "weaker")
        rejections.append({"strategy": strategy, "reason": why})
    cert = space.weaker_obstruction(p1, p2) or {"reason": "no candidate plaque verified"}
    return ProbeResult(False, None, None, "weaker", {**cert, "rejections": rejections})


def _near_points(p: SmoothMapSpec, r0: Sequence, count: int = 2) -> list[tuple]:
    pts = [tuple(r0)]
    deltas = [Fraction(1, 8), Fraction(-1, 16), Fraction(1, 32)]
    for k in range(count):
        for i in range(p.num_vars):
            r = list(r0)
            r[i] = r[i] + deltas[k % len(deltas)] if not isinstance(r[i], float) else r[i] + float(deltas[k])
            if p.domain.contains(r):
                pts.append(tuple(r))
    return pts


def verify_integral_plaque(space: DiffSpace, xi: SpaceVectorField, p: SmoothMapSpec, q: SmoothMapSpec,
                           r0: Sequence) -> tuple[bool, str]:
    n = p.num_vars
    if q.num_vars != n + 1:
        return False, "integral plaque has the wrong dimension"
    ok, why = is_plaque(space, q)
    if not ok:
        return False, f"candidate is not a plaque: {why}"
    base = fix_arguments(q, {n: 0})
    pts = _near_points(p, r0)
    if not maps_agree(base.restrict(p.domain) if base.is_polynomial else base, p, pts):
        return False, "q(r, 0) differs from p(r)"
    for r in pts:
        curve = fix_arguments(q, {i: r[i] for i in range(n)})
        got = tangent_class(space, curve, check=False)
        want = xi.at(p.evaluate(r))
        if not points_close(got.signature, want.signature):
            return False, f"[q(r, t)]_t differs from the field at r = {list(r)}"
    return True, ""


def locally_integrable_probe(space: DiffSpace, xi: SpaceVectorField, p: SmoothMapSpec, r0: Sequence,
                             budget: int = 4) -> ProbeResult:
    """Look for an (n+1)-plaque ``q`` with ``q(r, 0) = p(r)`` and ``[q(r, t)]_t = xi(p(r))`` near ``r0``."""
    rejections = []
    for strategy, q in space.integrate_candidates(xi, p)[:budget]:
        ok, why = verify_integral_plaque(space, xi, p, q, r0)
        if ok:
            return ProbeResult(True, q, strategy, "integrable")
        rejections.append({"strategy": strategy, "reason": why})
    cert = space.integrability_obstruction(xi, p, r0) or {"reason": "no integral plaque verified"}
    return ProbeResult(False, None, None, "integrable", {**cert, "rejections": rejections})


def _random_reparam(rng: random.Random, m: int, n: int) -> SmoothMapSpec:
    """A polynomial map R^m -> R^n fixing 0, small on the unit box."""
    comps = [random_poly(rng, m, 2, n_terms=3, zero_constant=True, bound=1) for _ in range(n)]
    return SmoothMapSpec(comps, Box.cube(m, Fraction(1, 4)), num_vars=m)


def check_linear_continuous(space: DiffSpace, samples: int = 8, rng: random.Random | None = None) -> CheckReport:
    """Sample the linearity conditions (a), (b) on 1-plaques and the continuity condition."""
    rng = rng or random.Random(0)
    report = CheckReport(f"linear-continuous:{space.name}")
    probe = space.sample_point(rng)
    p = space.sample_plaque(rng, probe, 1)
    if space.add_plaques(p, p) is None:
        raise FixtureError(f"{space.name} has no plaque addition constructor")
    special = list(getattr(space, "special_points", lambda: [])())
    for k in range(samples):
        base = special[k] if k < len(special) else space.sample_point(rng)
        p1 = space.sample_plaque(rng, base, 1)
        p2 = space.sample_plaque(rng, base, 1)
        p12 = space.add_plaques(p1, p2)
        ok = p12 is not None and is_plaque(space, p12)[0]
        ok = ok and points_close(tangent_class(space, p12).signature,
                                 (tangent_class(space, p1) + tangent_class(space, p2)).signature)
        report.add(f"sum-{k}", ok, point=list(base))
        m = 1 + k % 2
        phi = _random_reparam(rng, m, 1)
        rhs1 = signature_matrix(space, compose(p1, phi))
        ok_a = p12 is not None
        if ok_a:
            lhs = signature_matrix(space, compose(p12, phi))
            rhs2 = signature_matrix(space, compose(p2, phi))
            ok_a = all(points_close(r, [a + b for a, b in zip(s1, s2)]) for r, s1, s2 in zip(lhs, rhs1, rhs2))
            ok_a = ok_a and is_plaque(space, compose(p12, phi))[0]
        report.add(f"condition-a-{k}", ok_a, phi_dim=m)
        c = random_rational(rng) if k else Fraction(0)
        pc = space.scale_plaque(c, p1)
        lhs = signature_matrix(space, compose(pc, phi))
        ok_b = all(points_close(r, [c * a for a in s]) for r, s in zip(lhs, rhs1))
        report.add(f"condition-b-{k}", ok_b and is_plaque(space, pc)[0], scale=c)
        n = k % 2
        q1, q2 = space.sample_plaque_pair(rng, base, n, 1)
        q12 = space.sum_along(q1, q2, n)
        ok_c = q12 is not None and is_plaque(space, q12)[0]
        if ok_c:
            for r in sample_domain_points(q1.domain, n, count=3):
                fixed = {i: r[i] for i in range(n)}
                s12 = tangent_class(space, fix_arguments(q12, fixed), check=False).signature
                s1 = tangent_class(space, fix_arguments(q1, fixed), check=False).signature
                s2 = tangent_class(space, fix_arguments(q2, fixed), check=False).signature
                ok_c = ok_c and points_close(s12, [a + b for a, b in zip(s1, s2)])
        report.add(f"continuity-{k}", ok_c, base_dim=n)
    return report


def check_smooth_map(h: SmoothMapSpec, source: DiffSpace, target: DiffSpace, samples: int = 8,
                     rng: random.Random | None = None) -> CheckReport:
    """Plaques to plaques, equivalent plaques to equivalent plaques, and ``[p] -> [h o p]`` linear."""
    rng = rng or random.Random(0)
    if h.num_vars != source.ambient_dim or h.codim != target.ambient_dim:
        raise DimensionError("map does not go between the ambient spaces")
    report = CheckReport(f"smooth-map:{source.name}->{target.name}")
    for k in range(samples):
        base = source.sample_point(rng)
        dim = 1 + k % 2
        p = source.sample_plaque(rng, base, dim)
        hp = compose(h, p)
        report.add(f"plaque-{k}", is_plaque(target, hp)[0], dim=dim)
        psi = SmoothMapSpec([v + random_rational(rng) * v * v for v in PolyExpr.variables(1)], num_vars=1)
        c1 = source.sample_plaque(rng, base, 1)
        c2 = compose(c1, psi)
        same = equivalent(source, c1, c2)
        report.add(f"equivalence-{k}", same and equivalent(target, compose(h, c1), compose(h, c2)))
        c3 = source.sample_plaque(rng, base, 1)
        c13 = source.add_plaques(c1, c3)
        if c13 is not None and is_plaque(source, c13)[0]:
            lhs = tangent_class(target, compose(h, c13), check=False).signature
            rhs = (tangent_class(target, compose(h, c1), check=False)
                   + tangent_class(target, compose(h, c3), check=False)).signature
            scale = random_rational(rng)
            lhs_c = tangent_class(target, compose(h, source.scale_plaque(scale, c1)), check=False).signature
            rhs_c = tangent_class(target, compose(h, c1), check=False).signature
            ok = points_close(lhs, rhs) and points_close(lhs_c, [scale * v for v in rhs_c])
            report.add(f"linearity-{k}", ok)
    return report


def differential_matrix(h: SmoothMapSpec, source: DiffSpace, target: DiffSpace, point: Sequence) -> list[list]:
    """Matrix of ``[p] -> [h o p]`` on signatures at ``point`` (coordinate generators on the source)."""
    if not source.coordinate_generators:
        raise FixtureError("differential_matrix needs coordinate generators on the source")
    hg = compose(target.generator_map, h)
    return jacobian(hg, point)
