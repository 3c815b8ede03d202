"""Differential forms with polynomial coefficients on open boxes of R^n."""

from __future__ import annotations

import itertools
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Sequence

from .errors import DimensionError, DomainError, MetricError, SchemaError
from .exterior import ExteriorForm, MultiIndex, check_multi_index, det, merge_sign, multi_index_basis
from .expr import Box, PolyExpr, SmoothMapSpec, as_rational, parse_expr


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def poly_det(matrix: Sequence[Sequence[PolyExpr]], num_vars: int) -> PolyExpr:
    """Leibniz expansion; the matrices here are at most 5 x 5."""
    k = len(matrix)
    total = PolyExpr.zero(num_vars)
    for perm in itertools.permutations(range(k)):
        term = PolyExpr.constant(_perm_sign(perm), num_vars)
        for row, col in enumerate(perm):
            entry = matrix[row][col]
            if entry.is_zero():
                break
            term = term * entry
        else:
            total = total + term
    return total


def pullback_coefficients(composed: Mapping[MultiIndex, PolyExpr], jac: Sequence[Sequence[PolyExpr]],
                          degree: int, source_dim: int) -> dict[MultiIndex, PolyExpr]:
    """Coefficients of ``f^* w`` from ``a_I o f`` and the Jacobian of ``f``.

    ``jac`` has one row per target coordinate and one column per source
    coordinate; the J-coefficient is ``sum_I (a_I o f) det(jac[I, J])``.
    """
    out = {}
    for j in multi_index_basis(source_dim, degree):
        total = PolyExpr.zero(source_dim)
        for i, a in composed.items():
            if a.is_zero():
                continue
            minor = poly_det([[jac[r][c] for c in j] for r in i], source_dim)
            if not minor.is_zero():
                total = total + a * minor
        out[j] = total
    return out


class VectorFieldOnBox:
    """``sum_j b_j d/dx_j`` with polynomial components ``b_j``."""

    __slots__ = ("dim", "domain", "components")

    def __init__(self, components: Sequence[PolyExpr], domain: Box | None = None):
        components = tuple(components)
        dim = len(components)
        if any(c.num_vars != dim for c in components):
            raise DimensionError("a vector field on R^n needs n components in n variables")
        self.dim = dim
        self.components = components
        self.domain = domain if domain is not None else Box.whole(dim)

    @classmethod
    def coordinate(cls, index: int, dim: int, domain: Box | None = None) -> VectorFieldOnBox:
        comps = [PolyExpr.constant(1 if i == index else 0, dim) for i in range(dim)]
        return cls(comps, domain)

    @classmethod
    def from_strings(cls, texts: Sequence[str], domain: Box | None = None) -> VectorFieldOnBox:
        return cls([parse_expr(t, len(texts)) for t in texts], domain)

    def __call__(self, *point) -> tuple:
        if len(point) == 1 and isinstance(point[0], (tuple, list)):
            point = tuple(point[0])
        return tuple(c.evaluate(point) for c in self.components)

    def __add__(self, other: VectorFieldOnBox) -> VectorFieldOnBox:
        return VectorFieldOnBox([a + b for a, b in zip(self.components, other.components)], self.domain)

    def __mul__(self, f) -> VectorFieldOnBox:
        return VectorFieldOnBox([c * f for c in self.components], self.domain)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, VectorFieldOnBox) and self.components == other.components

    def __hash__(self) -> int:
        return hash(self.components)

    def __repr__(self) -> str:
        return f"VectorFieldOnBox({[str(c) for c in self.components]})"


class DifferentialForm:
    """A degree-k differential form ``sum_I a_I dx_I`` on a box in R^dim."""

    __slots__ = ("dim", "degree", "domain", "_coeffs")

    def __init__(self, dim: int, degree: int, coeffs: Mapping[Sequence[int], PolyExpr | str] | None = None,
                 domain: Box | None = None):
        clean: dict[MultiIndex, PolyExpr] = {}
        for idx, a in (coeffs or {}).items():
            idx = check_multi_index(idx, dim)
            if len(idx) != degree:
                raise DimensionError(f"multi-index {idx} does not have length {degree}")
            if isinstance(a, str):
                a = parse_expr(a, dim)
            elif not isinstance(a, PolyExpr):
                a = PolyExpr.constant(as_rational(a), dim)
            if a.num_vars != dim:
                raise DimensionError(f"coefficient {a} is not a polynomial in {dim} variables")
            a = clean[idx] + a if idx in clean else a
            clean[idx] = a
        self.dim = dim
        self.degree = degree
        self.domain = domain if domain is not None else Box.whole(dim)
        self._coeffs = {k: v for k, v in clean.items() if not v.is_zero()}

    @classmethod
    def zero(cls, dim: int, degree: int, domain: Box | None = None) -> DifferentialForm:
        return cls(dim, degree, {}, domain)

    @classmethod
    def function(cls, f: PolyExpr, domain: Box | None = None) -> DifferentialForm:
        return cls(f.num_vars, 0, {(): f}, domain)

    @classmethod
    def basis(cls, dim: int, idx: Sequence[int], domain: Box | None = None) -> DifferentialForm:
        idx = tuple(idx)
        return cls(dim, len(idx), {idx: PolyExpr.constant(1, dim)}, domain)

    @classmethod
    def dx(cls, i: int, dim: int) -> DifferentialForm:
        return cls.basis(dim, (i,))

    @property
    def coeffs(self) -> Mapping[MultiIndex, PolyExpr]:
        return MappingProxyType(self._coeffs)

    def coeff(self, idx: Sequence[int]) -> PolyExpr:
        return self._coeffs.get(tuple(idx), PolyExpr.zero(self.dim))

    def is_zero(self) -> bool:
        return not self._coeffs

    def with_domain(self, domain: Box) -> DifferentialForm:
        return DifferentialForm(self.dim, self.degree, self._coeffs, domain)

    # pointwise and module views

    def at(self, point: Sequence) -> ExteriorForm:
        if not self.domain.contains(point):
            raise DomainError(f"point {tuple(point)} is outside the domain box")
        return ExteriorForm(self.dim, self.degree, {i: a.evaluate(point) for i, a in self._coeffs.items()})

    def apply(self, *fields: VectorFieldOnBox) -> PolyExpr:
        if len(fields) != self.degree:
            raise DimensionError(f"a {self.degree}-form takes {self.degree} fields, got {len(fields)}")
        for f in fields:
            if f.dim != self.dim:
                raise DimensionError("vector field and form live in different dimensions")
        total = PolyExpr.zero(self.dim)
        for idx, a in self._coeffs.items():
            minor = poly_det([[f.components[i] for i in idx] for f in fields], self.dim)
            total = total + a * minor
        return total

    # algebra

    def _check_same(self, other: DifferentialForm):
        if not isinstance(other, DifferentialForm):
            raise TypeError("expected a DifferentialForm")
        if other.dim != self.dim:
            raise DimensionError(f"forms live in dimensions {self.dim} and {other.dim}")

    def __add__(self, other: DifferentialForm) -> DifferentialForm:
        self._check_same(other)
        if other.degree != self.degree:
            raise DimensionError("cannot add forms of different degree")
        coeffs = dict(self._coeffs)
        for idx, a in other._coeffs.items():
            coeffs[idx] = coeffs[idx] + a if idx in coeffs else a
        return DifferentialForm(self.dim, self.degree, coeffs, self.domain)

    def __neg__(self) -> DifferentialForm:
        return DifferentialForm(self.dim, self.degree, {k: -v for k, v in self._coeffs.items()}, self.domain)

    def __sub__(self, other: DifferentialForm) -> DifferentialForm:
        return self + (-other)

    def __mul__(self, f) -> DifferentialForm:
        """Multiplication by a function (PolyExpr) or a rational constant."""
        if isinstance(f, DifferentialForm):
            return NotImplemented
        return DifferentialForm(self.dim, self.degree, {k: v * f for k, v in self._coeffs.items()},
                                self.domain)

    __rmul__ = __mul__

    def wedge(self, other: DifferentialForm) -> DifferentialForm:
        self._check_same(other)
        coeffs: dict[MultiIndex, PolyExpr] = {}
        for i, a in self._coeffs.items():
            for j, b in other._coeffs.items():
                sign = merge_sign(i, j)
                if sign:
                    idx = tuple(sorted(i + j))
                    term = a * b * sign
                    coeffs[idx] = coeffs[idx] + term if idx in coeffs else term
        return DifferentialForm(self.dim, self.degree + other.degree, coeffs, self.domain)

    __xor__ = wedge

    def d(self) -> DifferentialForm:
        coeffs: dict[MultiIndex, PolyExpr] = {}
        for idx, a in self._coeffs.items():
            for j in range(self.dim):
                sign = merge_sign((j,), idx)
                if not sign:
                    continue
                da = a.partial(j)
                if da.is_zero():
                    continue
                key = tuple(sorted((j,) + idx))
                term = da * sign
                coeffs[key] = coeffs[key] + term if key in coeffs else term
        return DifferentialForm(self.dim, self.degree + 1, coeffs, self.domain)

    def pullback(self, f: SmoothMapSpec) -> DifferentialForm:
        if not f.is_polynomial:
            raise TypeError("pullback_smooth needs a polynomial map")
        if f.codim != self.dim:
            raise DimensionError(f"map lands in R^{f.codim}, form lives on R^{self.dim}")
        comps = list(f.components)
        composed = {i: a.substitute(comps) for i, a in self._coeffs.items()}
        coeffs = pullback_coefficients(composed, f.jacobian_polys(), self.degree, f.num_vars)
        return DifferentialForm(f.num_vars, self.degree, coeffs, f.domain)

    # comparison and serialization

    def __eq__(self, other) -> bool:
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return (self.dim, self.degree) == (other.dim, other.degree) and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self.dim, self.degree, frozenset(self._coeffs.items())))

    def __repr__(self) -> str:
        if not self._coeffs:
            return f"DifferentialForm(dim={self.dim}, degree={self.degree}, 0)"
        parts = []
        for idx, a in sorted(self._coeffs.items()):
            basis = "^".join(f"dx{i}" for i in idx) or "1"
            parts.append(f"({a})*{basis}")
        return f"DifferentialForm(dim={self.dim}, {' + '.join(parts)})"

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "domain": self.domain.to_json(),
            "degree": self.degree,
            "coeffs": [{"idx": list(i), "expr": str(a)} for i, a in sorted(self._coeffs.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> DifferentialForm:
        try:
            domain = Box.from_json(data["domain"]) if "domain" in data else None
            dim = int(data["dim"]) if "dim" in data else domain.dim
            coeffs = {tuple(c["idx"]): parse_expr(c["expr"], dim) for c in data["coeffs"]}
            return cls(dim, int(data["degree"]), coeffs, domain)
        except (KeyError, TypeError, AttributeError) as exc:
            raise SchemaError(f"malformed differential form JSON: {exc}") from exc


def eval_at(form: DifferentialForm, point: Sequence) -> ExteriorForm:
    return form.at(point)


def apply_to_fields(form: DifferentialForm, fields: Sequence[VectorFieldOnBox]) -> PolyExpr:
    return form.apply(*fields)


def wedge_forms(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    return a.wedge(b)


def pullback_smooth(f: SmoothMapSpec, form: DifferentialForm) -> DifferentialForm:
    return form.pullback(f)


def exterior_derivative(form: DifferentialForm) -> DifferentialForm:
    return form.d()


def differential_of_function(f: PolyExpr, domain: Box | None = None) -> DifferentialForm:
    return DifferentialForm(f.num_vars, 1, {(j,): f.partial(j) for j in range(f.num_vars)}, domain)


def _inverse(matrix: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(matrix)
    a = [[as_rational(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise MetricError("metric matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def metric_dual(form: DifferentialForm, metric: Sequence[Sequence]) -> VectorFieldOnBox:
    """The field ``eta`` with ``form(xi) = xi^T g eta`` (the gradient when ``form = df``)."""
    if form.degree != 1:
        raise DimensionError("metric_dual expects a 1-form")
    n = form.dim
    g = [[as_rational(v) for v in row] for row in metric]
    if len(g) != n or any(len(row) != n for row in g):
        raise DimensionError(f"metric must be {n} x {n}")
    if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
        raise MetricError("metric matrix is not symmetric")
    for k in range(1, n + 1):
        if det([row[:k] for row in g[:k]]) <= 0:
            raise MetricError("metric matrix is not positive definite")
    inv = _inverse(g)
    coeffs = [form.coeff((j,)) for j in range(n)]
    comps = []
    for i in range(n):
        total = PolyExpr.zero(n)
        for j in range(n):
            if inv[i][j]:
                total = total + coeffs[j] * inv[i][j]
        comps.append(total)
    return VectorFieldOnBox(comps, form.domain)
