"""Three representations of a k-form on a diffeological space and the maps between them.

* :class:`PointwiseForm` assigns an exterior form on the tangent space to each point.
* :class:`AlgebraicForm` is an alternating multilinear map on vector fields
  with values in functions on the space.
* :class:`PlaqueIndexedForm` assigns a differential form on the domain of
  every plaque, compatibly with reparameterization and tangency.

:func:`psi` sends a pointwise form to the family of its plaque pullbacks;
:func:`psi_inverse_at` recovers the pointwise value from a spanning plaque.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .diffeology import (DiffSpace, SpaceVectorField, TangentVector, check_smooth_map, classes_equal,
                         fix_arguments, is_plaque, joint_plaque_probe, line_through,
                         locally_integrable_probe, points_close, require_plaque, sample_domain_points,
                         tangent_class)
from .errors import (BaseMismatch, DimensionError, DomainError, FixtureError, NoPointwisePreimage,
                     NoSpanningPlaque, NotAPlaque, NotSmooth, NotTangent, SurjectivityNotWitnessed,
                     TangentConditionViolation, TDSError, TransverseSpaceError)
from .expr import PolyExpr, SmoothMapSpec, as_scalar, compose, jacobian, values_close
from .exterior import ExteriorForm, check_multi_index, multi_index_basis
from .forms import DifferentialForm, poly_det, pullback_coefficients

TOL = 1e-6


@dataclass
class CheckResult:
    passed: bool
    witness: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


class NumericForm:
    """A differential form on a box known only through its values ``r -> ExteriorForm``."""

    def __init__(self, dim: int, degree: int, func: Callable, domain=None):
        self.dim = dim
        self.degree = degree
        self.func = func
        self.domain = domain

    def at(self, point: Sequence) -> ExteriorForm:
        if self.domain is not None and not self.domain.contains(point):
            raise DomainError(f"point {tuple(point)} is outside the domain box")
        return self.func(tuple(point))

    def __mul__(self, f) -> NumericForm:
        if isinstance(f, PolyExpr):
            return NumericForm(self.dim, self.degree, lambda r: self.func(r) * f.evaluate(r), self.domain)
        c = as_scalar(f)
        return NumericForm(self.dim, self.degree, lambda r: self.func(r) * c, self.domain)

    __rmul__ = __mul__

    def __add__(self, other) -> NumericForm:
        return NumericForm(self.dim, self.degree, lambda r: self.func(r) + other.at(r), self.domain)


def _truncate(e: PolyExpr, n: int) -> PolyExpr:
    """Drop trailing variables that no longer occur."""
    terms = {}
    for exp, c in e.terms.items():
        if any(exp[n:]):
            raise ValueError("polynomial still depends on a dropped variable")
        terms[exp[:n]] = c
    return PolyExpr(n, terms)


# pointwise forms

class PointwiseForm:
    """A form ``F -> omega_F`` on the tangent spaces of ``space``.

    Tangent vectors are signatures, so ``omega_F`` is an exterior form on
    R^m with m the number of generators.  The form is given either by
    ambient polynomial coefficients over increasing generator multi-indices
    or by a rule returning the exterior form at each point.
    """

    def __init__(self, space: DiffSpace, degree: int,
                 coeffs: Mapping[Sequence[int], PolyExpr | str | object] | None = None,
                 rule: Callable | None = None, name: str = "omega"):
        self.space = space
        self.degree = degree
        self.name = name
        self.rule = rule
        dim, n = space.num_generators, space.ambient_dim
        self.coeffs: dict | None = None
        if rule is None:
            from .expr import parse_expr
            clean = {}
            for idx, c in (coeffs or {}).items():
                idx = check_multi_index(idx, dim)
                if len(idx) != degree:
                    raise DimensionError(f"multi-index {idx} does not have length {degree}")
                if isinstance(c, str):
                    c = parse_expr(c, n)
                elif not isinstance(c, PolyExpr):
                    c = PolyExpr.constant(c, n)
                if c.num_vars != n:
                    raise DimensionError("coefficients must be ambient polynomials")
                clean[idx] = clean[idx] + c if idx in clean else c
            self.coeffs = {k: v for k, v in clean.items() if not v.is_zero()}

    @classmethod
    def zero(cls, space: DiffSpace, degree: int) -> PointwiseForm:
        return cls(space, degree, {})

    @classmethod
    def from_differential_form(cls, space: DiffSpace, form: DifferentialForm) -> PointwiseForm:
        """An ambient polynomial form restricted to the space (coordinate generators)."""
        if form.dim != space.ambient_dim or not space.coordinate_generators:
            raise DimensionError("form must live on the ambient space of a coordinate-generated space")
        return cls(space, form.degree, dict(form.coeffs))

    @property
    def dim(self) -> int:
        return self.space.num_generators

    def at(self, point: Sequence, check: bool = True) -> ExteriorForm:
        if check and self.space.membership(point) is None:
            raise TDSError(f"{tuple(point)} is not a point of {self.space.name}")
        if self.rule is not None:
            return self.rule(tuple(point))
        return ExteriorForm(self.dim, self.degree, {i: c.evaluate(point) for i, c in self.coeffs.items()})

    def evaluate(self, point: Sequence, vectors: Sequence) -> object:
        sigs = []
        for v in vectors:
            if isinstance(v, TangentVector):
                if not points_close(v.base, point):
                    raise BaseMismatch("tangent vector based elsewhere")
                sigs.append(v.signature)
            else:
                sigs.append(tuple(v))
        return self.at(point).evaluate(*sigs)

    def _combine(self, other: PointwiseForm, sign: int) -> PointwiseForm:
        if other.space is not self.space or other.degree != self.degree:
            raise DimensionError("forms live on different spaces or have different degrees")
        if self.coeffs is not None and other.coeffs is not None:
            coeffs = dict(self.coeffs)
            for k, v in other.coeffs.items():
                coeffs[k] = coeffs[k] + v * sign if k in coeffs else v * sign
            return PointwiseForm(self.space, self.degree, coeffs)
        a, b = self, other
        return PointwiseForm(self.space, self.degree,
                             rule=lambda F: a.at(F, False) + b.at(F, False) * sign)

    def __add__(self, other: PointwiseForm) -> PointwiseForm:
        return self._combine(other, 1)

    def __sub__(self, other: PointwiseForm) -> PointwiseForm:
        return self._combine(other, -1)

    def __mul__(self, f) -> PointwiseForm:
        """Multiplication by a function on the space (ambient polynomial) or a constant."""
        if self.coeffs is not None:
            return PointwiseForm(self.space, self.degree, {k: v * f for k, v in self.coeffs.items()})
        a = self

        def rule(F):
            c = f.evaluate(F) if isinstance(f, PolyExpr) else f
            return a.at(F, False) * c
        return PointwiseForm(self.space, self.degree, rule=rule)

    __rmul__ = __mul__

    def pullback_along(self, p: SmoothMapSpec):
        """``p^* omega``: at r, the form ``omega_{p(r)}`` read through the
        signature Jacobian of p."""
        n = p.num_vars
        g = compose(self.space.generator_map, p)
        if p.is_polynomial and self.coeffs is not None:
            composed = {i: c.substitute(list(p.components)) for i, c in self.coeffs.items()}
            jac = [[comp.partial(j) for j in range(n)] for comp in g.components]
            return DifferentialForm(n, self.degree, pullback_coefficients(composed, jac, self.degree, n),
                                    p.domain)
        me = self

        def value(r):
            return me.at(p.evaluate(r), check=False).pullback(jacobian(g, r))
        return NumericForm(n, self.degree, value, p.domain)

    def __repr__(self) -> str:
        if self.coeffs is None:
            return f"PointwiseForm(<rule {self.name}>, degree={self.degree})"
        body = {k: str(v) for k, v in sorted(self.coeffs.items())}
        return f"PointwiseForm(degree={self.degree}, {body})"

    def to_json(self) -> dict:
        if self.coeffs is None:
            raise TDSError("rule-based forms cannot be serialized")
        return {"degree": self.degree, "space": self.space.name,
                "coeffs": [{"idx": list(k), "expr": str(v)} for k, v in sorted(self.coeffs.items())]}


# algebraic forms

class AlgebraicForm:
    """An alternating map on vector fields with values in functions on the space.

    Values are ambient polynomials, read as functions on the space.  The
    form is given by a rule on fields, or by its values on the space's
    documented spanning family of fields; in the latter case each argument is
    first decomposed over that family and the value is extended
    multilinearly.
    """

    def __init__(self, space: DiffSpace, degree: int, rule: Callable | None = None,
                 basis_values: Mapping[Sequence[int], PolyExpr] | None = None, name: str = "omega"):
        if rule is None and basis_values is None:
            raise ValueError("an algebraic form needs a rule or basis values")
        self.space = space
        self.degree = degree
        self.rule = rule
        self.name = name
        self.basis_values = None
        if basis_values is not None:
            self.basis_values = {tuple(k): v for k, v in basis_values.items()}
            for k in self.basis_values:
                if len(k) != degree or any(a >= b for a, b in zip(k, k[1:])):
                    raise DimensionError(f"basis index {k} is not an increasing {degree}-tuple")

    def __call__(self, *fields: SpaceVectorField) -> PolyExpr:
        if len(fields) != self.degree:
            raise DimensionError(f"a {self.degree}-form takes {self.degree} fields, got {len(fields)}")
        if self.rule is not None:
            return self.rule(*fields)
        n = self.space.ambient_dim
        if self.degree == 0:
            return self.basis_values.get((), PolyExpr.zero(n))
        rows = [self.space.decompose_field(f) for f in fields]
        total = PolyExpr.zero(n)
        for idx, value in self.basis_values.items():
            minor = poly_det([[row[i] for i in idx] for row in rows], n)
            total = total + value * minor
        return total

    def __repr__(self) -> str:
        return f"AlgebraicForm({self.name}, degree={self.degree})"


# plaque-indexed forms

class PlaqueIndexedForm:
    """A rule ``p -> Omega(p)`` giving a differential form on the domain of each plaque."""

    def __init__(self, space: DiffSpace, degree: int, rule: Callable, name: str = "Omega",
                 law: str = "rule", source: object = None):
        self.space = space
        self.degree = degree
        self.rule = rule
        self.name = name
        self.law = law
        self.source = source

    @classmethod
    def ambient_pullback(cls, space: DiffSpace, form: DifferentialForm) -> PlaqueIndexedForm:
        """``Omega(p) = p^* form`` for a polynomial form on the ambient space."""
        if form.dim != space.ambient_dim:
            raise DimensionError("form must live on the ambient space")

        def rule(p):
            if not p.is_polynomial:
                raise TypeError("ambient pullback needs a polynomial plaque")
            return form.pullback(p)
        return cls(space, form.degree, rule, law="ambient-pullback", source=form)

    def __call__(self, p: SmoothMapSpec, check: bool = True):
        if check:
            require_plaque(self.space, p)
        return self.rule(p)

    def __add__(self, other: PlaqueIndexedForm) -> PlaqueIndexedForm:
        if other.space is not self.space or other.degree != self.degree:
            raise DimensionError("forms live on different spaces or have different degrees")
        a, b = self, other
        return PlaqueIndexedForm(self.space, self.degree, lambda p: a.rule(p) + b.rule(p),
                                 f"{a.name}+{b.name}")

    def scaled_by(self, f) -> PlaqueIndexedForm:
        """``(f Omega)(p) = (f o p) Omega(p)`` for an ambient polynomial f or a constant."""
        a = self

        def rule(p):
            if isinstance(f, PolyExpr):
                if p.is_polynomial:
                    return a.rule(p) * f.substitute(list(p.components))
                fp = compose(SmoothMapSpec([f], num_vars=f.num_vars), p)
                base = a.rule(p)
                return NumericForm(p.num_vars, a.degree, lambda r: base.at(r) * fp.evaluate(r)[0], p.domain)
            return a.rule(p) * f
        return PlaqueIndexedForm(self.space, self.degree, rule, f"f*{self.name}")

    def to_json(self) -> dict:
        out = {"degree": self.degree, "law": self.law, "space": self.space.name}
        if self.law == "ambient-pullback":
            ident = SmoothMapSpec.identity(self.space.ambient_dim)
            out["generators"] = [{"plaque": ident.to_json(), "form": self.source.to_json()}]
        return out


def _forms_equal(a, b, samples: Sequence[Sequence]) -> tuple[bool, dict]:
    if isinstance(a, DifferentialForm) and isinstance(b, DifferentialForm):
        keys = sorted(set(a.coeffs) | set(b.coeffs))
        for k in keys:
            if a.coeff(k) != b.coeff(k):
                return False, {"index": list(k), "left": str(a.coeff(k)), "right": str(b.coeff(k))}
        return True, {}
    for r in samples:
        fa, fb = a.at(r), b.at(r)
        if not fa.close_to(fb, TOL):
            return False, {"point": [float(v) for v in r], "left": repr(fa), "right": repr(fb)}
    return True, {}


def compatibility_check(omega: PlaqueIndexedForm, p: SmoothMapSpec, phi: SmoothMapSpec) -> CheckResult:
    """``Omega(p o phi) == phi^* Omega(p)``; exact for polynomial data."""
    if phi.codim != p.num_vars:
        raise DimensionError("reparameterization does not land in the plaque domain")
    q = compose(p, phi)
    for r in sample_domain_points(phi.domain, phi.num_vars, count=3):
        try:
            q.evaluate(r)
        except DomainError as exc:
            raise DomainError(f"reparameterization escapes the plaque domain: {exc}") from exc
    require_plaque(omega.space, q)
    lhs = omega(q, check=False)
    base = omega(p, check=False)
    if isinstance(base, DifferentialForm) and phi.is_polynomial:
        rhs = base.pullback(phi)
    else:
        def value(r):
            return base.at(phi.evaluate(r, check_domain=False)).pullback(jacobian(phi, r))
        rhs = NumericForm(phi.num_vars, omega.degree, value, phi.domain)
    ok, witness = _forms_equal(lhs, rhs, sample_domain_points(phi.domain, phi.num_vars, count=4))
    return CheckResult(ok, witness)


def _tangent_along(space: DiffSpace, p1, r1, p2, r2, v) -> bool:
    c1 = tangent_class(space, line_through(p1, r1, v), check=False)
    c2 = tangent_class(space, line_through(p2, r2, v), check=False)
    return c1 == c2


def tangent_condition_check(omega: PlaqueIndexedForm, p1: SmoothMapSpec, r1: Sequence, p2: SmoothMapSpec,
                            r2: Sequence, dirs: Sequence[Sequence], extra: Sequence | None = None,
                            literal: bool = False) -> CheckResult:
    """Compare ``Omega(p1)`` at r1 with ``Omega(p2)`` at r2 on shared directions.

    The plaques must define the same classes ``[p(t v_i + r)]``.  The
    derivative clause compares ``dOmega`` on ``(v_1..v_k, extra)``; unless
    ``literal`` is set it is only enforced when ``extra`` is a shared
    direction too, since otherwise the two values concern different vectors.
    """
    space = omega.space
    if p1.num_vars != p2.num_vars:
        raise DimensionError("plaques must have the same dimension")
    if len(dirs) != omega.degree:
        raise DimensionError(f"need {omega.degree} directions")
    if not points_close(p1.evaluate(r1), p2.evaluate(r2)):
        raise NotTangent("plaques pass through different points")
    for i, v in enumerate(dirs):
        if not _tangent_along(space, p1, r1, p2, r2, v):
            raise NotTangent(f"plaques are not tangent along direction {i}")
    f1, f2 = omega(p1, check=False), omega(p2, check=False)
    a, b = f1.at(r1).evaluate(*dirs), f2.at(r2).evaluate(*dirs)
    if not values_close(a, b, TOL):
        return CheckResult(False, {"clause": "value", "left": a, "right": b})
    witness: dict = {"value": a}
    if extra is not None:
        shared = _tangent_along(space, p1, r1, p2, r2, extra)
        if shared or literal:
            if not (isinstance(f1, DifferentialForm) and isinstance(f2, DifferentialForm)):
                raise TypeError("the derivative clause needs polynomial forms")
            da = f1.d().at(r1).evaluate(*dirs, extra)
            db = f2.d().at(r2).evaluate(*dirs, extra)
            if not values_close(da, db, TOL):
                return CheckResult(False, {"clause": "derivative", "left": da, "right": db,
                                           "extra_shared": shared})
            witness["derivative"] = da
        else:
            witness["derivative"] = "skipped: extra direction not shared"
    return CheckResult(True, witness)


# the map Psi and its inverse

def psi(space: DiffSpace, omega: PointwiseForm) -> PlaqueIndexedForm:
    """``Psi(omega)(p) = p^* omega``.  Refuses spaces not attested free of transverse points."""
    if omega.space is not space:
        raise DimensionError("form lives on a different space")
    if not space.non_transverse:
        raise TransverseSpaceError(f"{space.name} is not attested free of transverse points")
    return PlaqueIndexedForm(space, omega.degree, omega.pullback_along, name=f"Psi({omega.name})",
                             law="pointwise-pullback", source=omega)


def _witness(space: DiffSpace, point: Sequence, v) -> SmoothMapSpec:
    if isinstance(v, TangentVector):
        if not points_close(v.base, point):
            raise BaseMismatch("tangent vector based elsewhere")
        if v.witness is not None:
            return v.witness
        v = v.signature
    if not space.coordinate_generators:
        raise FixtureError("signatures only determine a witness for coordinate generators")
    return space.realize(point, v)


def spanning_plaque(space: DiffSpace, point: Sequence, vectors: Sequence,
                    witnesses: Sequence[SmoothMapSpec] | None = None) -> SmoothMapSpec:
    """A k-plaque p at ``point`` with ``[p(t e_i)] = v_i``, built by iterated joins."""
    if witnesses is None:
        witnesses = [_witness(space, point, v) for v in vectors]
    if not witnesses:
        return SmoothMapSpec.constant_map(tuple(point), 0)
    p = witnesses[0]
    for i, w in enumerate(witnesses[1:], start=1):
        res = joint_plaque_probe(space, p, w, mode="strong")
        if not res.found:
            raise NoSpanningPlaque(f"no plaque joins the first {i} vectors with vector {i}", res.certificate)
        p = res.plaque
    return p


def _reparameterized(w: SmoothMapSpec) -> SmoothMapSpec:
    t = PolyExpr.var(0, 1)
    return compose(w, SmoothMapSpec([t + t * t], num_vars=1))


def psi_inverse_at(space: DiffSpace, omega: PlaqueIndexedForm, point: Sequence, vectors: Sequence,
                   cross_check: bool = False):
    """``Omega(p)(0)(e_1..e_k)`` for a plaque p spanning the given tangent vectors."""
    if len(vectors) != omega.degree:
        raise DimensionError(f"need {omega.degree} tangent vectors")
    p = spanning_plaque(space, point, vectors)
    k = omega.degree
    origin = (Fraction(0),) * k
    basis = [[int(i == j) for j in range(k)] for i in range(k)]
    value = omega(p, check=False).at(origin).evaluate(*basis)
    if cross_check and k:
        alt = [_reparameterized(_witness(space, point, v)) for v in vectors]
        other = omega(spanning_plaque(space, point, vectors, alt), check=False).at(origin).evaluate(*basis)
        if not values_close(value, other, TOL):
            raise TangentConditionViolation(f"value depends on the spanning plaque: {value} vs {other}")
    return value


def psi_injectivity_witness(space: DiffSpace, omega: PointwiseForm, point: Sequence,
                            vectors: Sequence) -> SmoothMapSpec | None:
    """A plaque p with ``Psi(omega)(p)(0) != 0`` when ``omega_F(v) != 0``; ``None`` if the value is 0."""
    if values_close(omega.evaluate(point, vectors), 0, TOL):
        return None
    p = spanning_plaque(space, point, vectors)
    form = omega.pullback_along(p)
    k = omega.degree
    if form.at((Fraction(0),) * k).is_zero():
        raise TangentConditionViolation("spanning plaque pulls the form back to zero")
    return p


def inverse_along_fields(space: DiffSpace, omega: PlaqueIndexedForm, fields: Sequence[SpaceVectorField],
                         p: SmoothMapSpec) -> PolyExpr:
    """The function ``r -> omega_{p(r)}(xi_1(p(r)), ..)`` as a polynomial in r.

    Each field is integrated along p, the integral plaques are joined into
    one (n+k)-plaque q, and the value is the coefficient of
    ``dt_1 ^ .. ^ dt_k`` in ``Omega(q)`` at ``t = 0``.
    """
    if len(fields) != omega.degree:
        raise DimensionError(f"need {omega.degree} fields")
    if not p.is_polynomial:
        raise TypeError("inverse_along_fields needs a polynomial plaque")
    n, k = p.num_vars, len(fields)
    origin = (Fraction(0),) * n
    qs = []
    for xi in fields:
        res = locally_integrable_probe(space, xi, p, origin)
        if not res.found:
            raise NoSpanningPlaque(f"field {xi.name} has no integral plaque along p", res.certificate)
        qs.append(res.plaque)
    q = space.join_along(p, qs)
    if q is None or not is_plaque(space, q)[0]:
        raise NoSpanningPlaque("integral plaques cannot be joined")
    form = omega(q, check=False)
    coeff = form.coeff(tuple(range(n, n + k))).fix({n + i: 0 for i in range(k)})
    return _truncate(coeff, n)


# conversions between representations

def _field_signature_polys(space: DiffSpace, xi: SpaceVectorField) -> list[PolyExpr]:
    """Signature of an ambient polynomial field as polynomials: ``grad g_j . xi``."""
    if xi.components is None:
        raise TypeError("rule-based fields have no polynomial signature")
    out = []
    for g in space.generators:
        total = PolyExpr.zero(space.ambient_dim)
        for a, c in enumerate(xi.components):
            total = total + g.partial(a) * c
        out.append(total)
    return out


def pointwise_to_algebraic(omega: PointwiseForm) -> AlgebraicForm:
    """``(xi_1..xi_k) -> (F -> omega_F(xi_1(F), ..))``."""
    if omega.coeffs is None:
        raise TypeError("pointwise_to_algebraic needs a coefficient form")
    space, coeffs, n = omega.space, omega.coeffs, omega.space.ambient_dim

    def rule(*fields):
        sigs = [_field_signature_polys(space, xi) for xi in fields]
        total = PolyExpr.zero(n) if omega.degree else PolyExpr.zero(n)
        for idx, c in coeffs.items():
            total = total + c * poly_det([[s[i] for i in idx] for s in sigs], n)
        return total
    return AlgebraicForm(space, omega.degree, rule=rule, name=f"alg({omega.name})")


def algebraic_to_pointwise(alg: AlgebraicForm, check_points: Sequence[Sequence] = ()) -> PointwiseForm:
    """The pointwise form inducing ``alg`` when the space's field basis is a pointwise frame.

    The basis must consist of the coordinate fields of a coordinate-generated
    space (the free-module case); a basis whose signatures become dependent
    at some point has no pointwise preimage in general, and the witness
    point is reported.
    """
    space = alg.space
    basis = space.field_basis()
    points = list(check_points) + list(getattr(space, "special_points", lambda: [])())
    for F in points:
        sigs = [xi.at(F).signature for xi in basis]
        from .diffeology import rank
        if rank(sigs) < len(basis):
            raise NoPointwisePreimage("field basis is pointwise dependent",
                                      {"point": list(F), "signatures": [list(s) for s in sigs]})
    n = space.ambient_dim
    coords = [SpaceVectorField(space, [PolyExpr.constant(int(i == j), n) for j in range(n)])
              for i in range(n)]
    if not space.coordinate_generators or len(basis) != n or any(
            b.components != c.components for b, c in zip(basis, coords)):
        raise FixtureError(f"{space.name} has no coordinate frame of vector fields")
    coeffs = {idx: alg(*[coords[i] for i in idx]) for idx in multi_index_basis(n, alg.degree)}
    return PointwiseForm(space, alg.degree, coeffs, name=f"pt({alg.name})")


def axes_counterexample():
    """An algebraic 1-form on the union of the coordinate axes with no pointwise preimage.

    With ``xi_1 = x d/dx`` and ``xi_2 = y d/dy`` every field is
    ``h_1(x) xi_1 + h_2(y) xi_2``; the form sends it to
    ``h_1(x)(x^2+1) + h_2(y)(2y^2+1)``.
    """
    from .spaces import make_axes_union

    X = make_axes_union()
    x, y = PolyExpr.variables(2)
    omega = AlgebraicForm(X, 1, basis_values={(0,): x * x + 1, (1,): y * y * 2 + 1}, name="axes-counterexample")
    xi1, xi2 = X.field_basis()
    origin = (Fraction(0), Fraction(0))
    value = omega(xi1).evaluate(origin)
    signature = xi1.at(origin).signature
    # any pointwise form is linear on T_(0,0), so it sends the zero class to 0
    forced = Fraction(0) if all(v == 0 for v in signature) else None
    evidence = {
        "omega_xi1_at_origin": value,
        "xi1_signature_at_origin": list(signature),
        "pointwise_value_forced": forced,
        "omega_xi1_at_(1,0)": omega(xi1).evaluate((1, 0)),
        "omega_xi2_at_origin": omega(xi2).evaluate(origin),
        "has_pointwise_preimage": not (forced is not None and forced != value),
    }
    return omega, evidence


# pullbacks

def _require_smooth(h: SmoothMapSpec, source: DiffSpace, target: DiffSpace, samples: int) -> None:
    if samples:
        report = check_smooth_map(h, source, target, samples)
        if not report.passed:
            raise NotSmooth(f"map fails smoothness checks: {[c['id'] for c in report.cases if not c['passed']]}")


def pullback_eps1(h: SmoothMapSpec, omega: PointwiseForm, source: DiffSpace, samples: int = 3) -> PointwiseForm:
    """``(h^* omega)_F(v..) = omega_{h(F)}(dh v, ..)`` on a coordinate-generated source."""
    target = omega.space
    if not source.coordinate_generators:
        raise FixtureError("pullback_eps1 needs coordinate generators on the source")
    _require_smooth(h, source, target, samples)
    gh = compose(target.generator_map, h)
    n, k = source.ambient_dim, omega.degree
    if h.is_polynomial and omega.coeffs is not None:
        composed = {i: c.substitute(list(h.components)) for i, c in omega.coeffs.items()}
        jac = [[c.partial(j) for j in range(n)] for c in gh.components]
        return PointwiseForm(source, k, pullback_coefficients(composed, jac, k, n), name=f"h*{omega.name}")

    def rule(F):
        return omega.at(h.evaluate(F, check_domain=False), check=False).pullback(jacobian(gh, F))
    return PointwiseForm(source, k, rule=rule, name=f"h*{omega.name}")


def pullback_eps3(h: SmoothMapSpec, omega: PlaqueIndexedForm, source: DiffSpace, samples: int = 3) -> PlaqueIndexedForm:
    """``(h^* Omega)(p) = Omega(h o p)``."""
    target = omega.space
    _require_smooth(h, source, target, samples)

    def rule(p):
        hp = compose(h, p)
        ok, why = is_plaque(target, hp)
        if not ok:
            raise NotAPlaque(f"h o p is not a plaque of the target: {why}")
        return omega.rule(hp)
    return PlaqueIndexedForm(source, omega.degree, rule, name=f"h*{omega.name}")


def pullback_eps2(h: SmoothMapSpec, omega: AlgebraicForm, source: DiffSpace,
                  section: SmoothMapSpec | None) -> AlgebraicForm:
    """``h^* omega(eta..) = omega(dh eta, ..) o h``.

    ``dh eta`` is a field on the target only when eta is h-related; it is
    realized through a polynomial ``section`` with ``h o section = id``,
    which also witnesses surjectivity of every ``dh(F)``.
    """
    target = omega.space
    if section is None:
        raise SurjectivityNotWitnessed("no right inverse supplied for dh")
    if not (h.is_polynomial and section.is_polynomial):
        raise SurjectivityNotWitnessed("surjectivity witness must be polynomial")
    if section.num_vars != target.ambient_dim or section.codim != source.ambient_dim:
        raise SurjectivityNotWitnessed("section has the wrong shape")
    if list(compose(h, section).components) != PolyExpr.variables(target.ambient_dim):
        raise SurjectivityNotWitnessed("h o section is not the identity")
    jac = h.jacobian_polys()
    s_comps = list(section.components)

    def push(eta: SpaceVectorField) -> SpaceVectorField:
        if eta.components is None:
            raise TypeError("pushforward needs a polynomial field")
        comps = []
        for row in jac:
            total = PolyExpr.zero(target.ambient_dim)
            for a, c in enumerate(eta.components):
                total = total + row[a].substitute(s_comps) * c.substitute(s_comps)
            comps.append(total)
        return SpaceVectorField(target, comps, name=f"dh({eta.name})")

    h_comps = list(h.components)

    def rule(*fields):
        return omega(*[push(e) for e in fields]).substitute(h_comps)
    return AlgebraicForm(source, omega.degree, rule=rule, name=f"h*{omega.name}")
