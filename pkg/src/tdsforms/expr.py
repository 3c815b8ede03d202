"""Exact multivariate polynomials, smooth maps between boxes, and jets.

Polynomials with rational coefficients are the kernel's stand-in for smooth
functions: every identity checked elsewhere becomes an exact equality.  Maps
that are not polynomial (stereographic charts, angle parameterizations) use
the black-box mode of :class:`SmoothMapSpec`, whose derivatives come from
five-point central finite differences.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DimensionError, DomainError, ParseError, SchemaError

Exponent = tuple[int, ...]


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def as_scalar(value):
    """Rationals stay exact; floats pass through for black-box arithmetic."""
    if isinstance(value, float):
        return value
    return as_rational(value)


class PolyExpr:
    """A polynomial in ``num_vars`` variables with rational coefficients.

    Terms are kept in canonical form: a mapping from exponent tuples to
    nonzero :class:`~fractions.Fraction` coefficients.  Instances are
    immutable and hashable.
    """

    __slots__ = ("num_vars", "_terms", "_hash")

    def __init__(self, num_vars: int, terms: Mapping[Sequence[int], object] | None = None):
        if num_vars < 0:
            raise DimensionError("num_vars must be non-negative")
        clean: dict[Exponent, Fraction] = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != num_vars:
                raise DimensionError(f"exponent {exp} does not have length {num_vars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = as_rational(coeff)
            if c:
                clean[exp] = clean.get(exp, 0) + c
                if not clean[exp]:
                    del clean[exp]
        self.num_vars = num_vars
        self._terms = clean
        self._hash = None

    @classmethod
    def _trusted(cls, num_vars: int, terms: dict) -> PolyExpr:
        """Build from exponent tuples and Fraction coefficients without validation."""
        obj = cls.__new__(cls)
        obj.num_vars = num_vars
        obj._terms = {e: c for e, c in terms.items() if c}
        obj._hash = None
        return obj

    # construction helpers

    @classmethod
    def constant(cls, value, num_vars: int) -> PolyExpr:
        return cls(num_vars, {(0,) * num_vars: value})

    @classmethod
    def zero(cls, num_vars: int) -> PolyExpr:
        return cls(num_vars)

    @classmethod
    def var(cls, index: int, num_vars: int) -> PolyExpr:
        if not 0 <= index < num_vars:
            raise DimensionError(f"variable x{index} out of range for {num_vars} variables")
        exp = [0] * num_vars
        exp[index] = 1
        return cls(num_vars, {tuple(exp): 1})

    @classmethod
    def variables(cls, num_vars: int) -> list[PolyExpr]:
        return [cls.var(i, num_vars) for i in range(num_vars)]

    @classmethod
    def parse(cls, text: str, num_vars: int) -> PolyExpr:
        return _Parser(text, num_vars).parse()

    # basic queries

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(exp) for exp in self._terms)

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.num_vars, Fraction(0))

    def coefficient(self, exp: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exp), Fraction(0))

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def degree_in(self, var: int) -> int:
        return max((e[var] for e in self._terms), default=-1)

    # arithmetic

    def _coerce(self, other) -> PolyExpr:
        if isinstance(other, PolyExpr):
            if other.num_vars != self.num_vars:
                raise DimensionError(
                    f"cannot combine polynomials in {self.num_vars} and {other.num_vars} variables")
            return other
        return PolyExpr.constant(as_rational(other), self.num_vars)

    def __add__(self, other) -> PolyExpr:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        terms = dict(self._terms)
        for exp, c in other._terms.items():
            terms[exp] = terms[exp] + c if exp in terms else c
        return PolyExpr._trusted(self.num_vars, terms)

    __radd__ = __add__

    def __neg__(self) -> PolyExpr:
        return PolyExpr._trusted(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> PolyExpr:
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> PolyExpr:
        return (-self) + other

    def __mul__(self, other) -> PolyExpr:
        if not isinstance(other, PolyExpr):
            try:
                c = as_rational(other)
            except TypeError:
                return NotImplemented
            return PolyExpr._trusted(self.num_vars, {e: v * c for e, v in self._terms.items()})
        other = self._coerce(other)
        terms: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(map(sum, zip(e1, e2)))
                p = c1 * c2
                terms[e] = terms[e] + p if e in terms else p
        return PolyExpr._trusted(self.num_vars, terms)

    __rmul__ = __mul__

    def __truediv__(self, other) -> PolyExpr:
        if isinstance(other, PolyExpr):
            return NotImplemented
        return self * (1 / as_rational(other))

    def __pow__(self, power: int) -> PolyExpr:
        if not isinstance(power, int) or power < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = PolyExpr.constant(1, self.num_vars)
        base = self
        while power:
            if power & 1:
                result = result * base
            power >>= 1
            if power:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, PolyExpr):
            return self.num_vars == other.num_vars and self._terms == other._terms
        try:
            return self == PolyExpr.constant(as_rational(other), self.num_vars)
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num_vars, frozenset(self._terms.items())))
        return self._hash

    # calculus and evaluation

    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (tuple, list)):
            point = tuple(point[0])
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        if len(point) != self.num_vars:
            raise DimensionError(f"point has {len(point)} coordinates, expected {self.num_vars}")
        point = [as_scalar(v) for v in point]
        total = Fraction(0)
        for exp, c in self._terms.items():
            value = c
            for x, e in zip(point, exp):
                if e:
                    value = value * x ** e
            total = total + value
        return total

    def partial(self, var: int) -> PolyExpr:
        if not 0 <= var < self.num_vars:
            raise DimensionError(f"variable x{var} out of range for {self.num_vars} variables")
        terms = {}
        for exp, c in self._terms.items():
            if exp[var]:
                e = list(exp)
                e[var] -= 1
                terms[tuple(e)] = c * exp[var]
        return PolyExpr(self.num_vars, terms)

    def gradient(self) -> list[PolyExpr]:
        return [self.partial(i) for i in range(self.num_vars)]

    def substitute(self, values: Sequence[PolyExpr]) -> PolyExpr:
        """Formal composition ``self(values[0], ..., values[n-1])``."""
        if len(values) != self.num_vars:
            raise DimensionError(f"need {self.num_vars} substitutions, got {len(values)}")
        if not values:
            return PolyExpr.constant(self.constant_term, 0)
        m = values[0].num_vars
        if any(v.num_vars != m for v in values):
            raise DimensionError("substituted polynomials must share num_vars")
        powers: dict[tuple[int, int], PolyExpr] = {}

        def power(i: int, e: int) -> PolyExpr:
            key = (i, e)
            if key not in powers:
                powers[key] = values[i] if e == 1 else power(i, e - 1) * values[i]
            return powers[key]

        acc: dict[Exponent, Fraction] = {}
        for exp, c in self._terms.items():
            term = None
            for i, e in enumerate(exp):
                if e:
                    term = power(i, e) if term is None else term * power(i, e)
            items = term._terms.items() if term is not None else [((0,) * m, Fraction(1))]
            for e2, c2 in items:
                p = c * c2
                acc[e2] = acc[e2] + p if e2 in acc else p
        return PolyExpr._trusted(m, acc)

    def fix(self, assignments: Mapping[int, object]) -> PolyExpr:
        """Substitute rational constants for some variables, keeping the rest."""
        n = self.num_vars
        keep = [i for i in range(n) if i not in assignments]
        values = []
        for i in range(n):
            if i in assignments:
                values.append(PolyExpr.constant(as_rational(assignments[i]), len(keep)))
            else:
                values.append(PolyExpr.var(keep.index(i), len(keep)))
        return self.substitute(values)

    def divide_by_var(self, var: int) -> PolyExpr:
        """Exact quotient by ``x_var``; every term must contain that variable."""
        terms = {}
        for exp, c in self._terms.items():
            if not exp[var]:
                raise ValueError(f"{self} is not divisible by x{var}")
            e = list(exp)
            e[var] -= 1
            terms[tuple(e)] = c
        return PolyExpr(self.num_vars, terms)

    def embed(self, num_vars: int, positions: Sequence[int]) -> PolyExpr:
        """Re-express in ``num_vars`` variables; variable i becomes ``positions[i]``."""
        terms = {}
        for exp, c in self._terms.items():
            e = [0] * num_vars
            for i, k in enumerate(exp):
                e[positions[i]] += k
            terms[tuple(e)] = c
        return PolyExpr(num_vars, terms)

    # printing and serialization

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: (-sum(t[0]), tuple(-e for e in t[0])))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for exp, c in self.sorted_terms():
            mono = "*".join(
                f"x{i}" if e == 1 else f"x{i}^{e}" for i, e in enumerate(exp) if e)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            if not pieces:
                pieces.append(body if sign == "+" else f"-{body}")
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"PolyExpr({self.num_vars}, {str(self)!r})"

    def to_json(self) -> dict:
        return {
            "vars": self.num_vars,
            "terms": [
                {"exp": list(e), "num": c.numerator, "den": c.denominator}
                for e, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> PolyExpr:
        try:
            n = int(data["vars"])
            terms = {}
            for t in data["terms"]:
                terms[tuple(t["exp"])] = Fraction(int(t["num"]), int(t.get("den", 1)))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed polynomial JSON: {exc}") from exc
        return cls(n, terms)


def parse_expr(text: str, num_vars: int) -> PolyExpr:
    return PolyExpr.parse(text, num_vars)


def eval_expr(e: PolyExpr, point: Sequence):
    return e.evaluate(point)


def partial(e: PolyExpr, var: int) -> PolyExpr:
    return e.partial(var)


# expression grammar (precedence: ^ > unary minus > * > + -)
#   expr    := term (('+' | '-') term)*
#   term    := unary ('*' unary)*
#   unary   := ('-' | '+') unary | power
#   power   := primary ('^' INT)*
#   primary := INT ['/' INT] | VAR | '(' expr ')'

class _Parser:
    def __init__(self, text: str, num_vars: int):
        self.text = text
        self.num_vars = num_vars
        self.tokens = list(self._tokenize(text))
        self.pos = 0

    def _tokenize(self, text: str):
        i = 0
        while i < len(text):
            c = text[i]
            if c.isspace():
                i += 1
            elif c.isdigit():
                j = i
                while j < len(text) and text[j].isdigit():
                    j += 1
                yield ("int", int(text[i:j]), i)
                i = j
            elif c == "x":
                j = i + 1
                while j < len(text) and text[j].isdigit():
                    j += 1
                if j == i + 1:
                    raise ParseError("expected variable index after 'x'", i)
                index = int(text[i + 1:j])
                if index >= self.num_vars:
                    raise ParseError(
                        f"variable x{index} out of range for {self.num_vars} variables", i)
                yield ("var", index, i)
                i = j
            elif c in "+-*^()/":
                yield (c, c, i)
                i += 1
            else:
                raise ParseError(f"unexpected character {c!r}", i)
        yield ("end", None, len(text))

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        return tok

    def parse(self) -> PolyExpr:
        result = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2])
        return result

    def expr(self) -> PolyExpr:
        left = self.term()
        while self.peek()[0] in "+-":
            op = self.advance()[0]
            right = self.term()
            left = left + right if op == "+" else left - right
        return left

    def term(self) -> PolyExpr:
        left = self.unary()
        while self.peek()[0] == "*":
            self.advance()
            left = left * self.unary()
        return left

    def unary(self) -> PolyExpr:
        kind = self.peek()[0]
        if kind == "-":
            self.advance()
            return -self.unary()
        if kind == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> PolyExpr:
        base = self.primary()
        while self.peek()[0] == "^":
            self.advance()
            tok = self.expect("int")
            base = base ** tok[1]
        return base

    def primary(self) -> PolyExpr:
        tok = self.advance()
        kind = tok[0]
        if kind == "int":
            value = Fraction(tok[1])
            if self.peek()[0] == "/":
                self.advance()
                den = self.expect("int")
                if den[1] == 0:
                    raise ParseError("zero denominator", den[2])
                value = value / den[1]
            return PolyExpr.constant(value, self.num_vars)
        if kind == "var":
            return PolyExpr.var(tok[1], self.num_vars)
        if kind == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "end":
            raise ParseError("unexpected end of input", tok[2])
        raise ParseError(f"unexpected token {tok[1]!r}", tok[2])


@dataclass(frozen=True)
class Box:
    """Open axis-aligned box; ``math.inf`` bounds give unbounded directions."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise DimensionError("box bounds differ in length")
        if any(not a < b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box must have lo < hi in every coordinate")

    @classmethod
    def whole(cls, dim: int) -> Box:
        return cls((-math.inf,) * dim, (math.inf,) * dim)

    @classmethod
    def cube(cls, dim: int, radius, center: Sequence | None = None) -> Box:
        r = as_scalar(radius)
        c = [as_scalar(v) for v in center] if center is not None else [Fraction(0)] * dim
        return cls(tuple(v - r for v in c), tuple(v + r for v in c))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def is_whole(self) -> bool:
        return all(a == -math.inf for a in self.lo) and all(b == math.inf for b in self.hi)

    def contains(self, point: Sequence) -> bool:
        if len(point) != self.dim:
            raise DimensionError(f"point has {len(point)} coordinates, box has {self.dim}")
        return all(a < x < b for a, x, b in zip(self.lo, point, self.hi))

    def __contains__(self, point) -> bool:
        return self.contains(point)

    def to_json(self) -> dict:
        def enc(v):
            if v in (math.inf, -math.inf):
                return None
            v = as_scalar(v)
            return str(v) if isinstance(v, Fraction) else v
        return {"lo": [enc(v) for v in self.lo], "hi": [enc(v) for v in self.hi]}

    @classmethod
    def from_json(cls, data: Mapping) -> Box:
        def dec(v, default):
            if v is None:
                return default
            return as_scalar(Fraction(v) if isinstance(v, (str, int)) else v)
        try:
            lo = tuple(dec(v, -math.inf) for v in data["lo"])
            hi = tuple(dec(v, math.inf) for v in data["hi"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed box JSON: {exc}") from exc
        return cls(lo, hi)


# five-point central stencils, offsets -2..2
_STENCILS = {
    1: ((Fraction(1, 12), Fraction(-8, 12), 0, Fraction(8, 12), Fraction(-1, 12)), 1),
    2: ((Fraction(-1, 12), Fraction(16, 12), Fraction(-30, 12), Fraction(16, 12), Fraction(-1, 12)), 2),
    3: ((Fraction(-1, 2), 1, 0, -1, Fraction(1, 2)), 3),
    4: ((1, -4, 6, -4, 1), 4),
}


def _finite_difference(func: Callable, point: Sequence[float], orders: Sequence[int], step: float) -> list[float]:
    """Tensor-product five-point estimate of the mixed partial ``orders`` at ``point``."""
    axes = [i for i, k in enumerate(orders) if k]
    if any(orders[i] > 4 for i in axes):
        raise ValueError("black-box derivatives are limited to order 4 per variable")
    steps = {i: step * 10 ** (orders[i] - 1) for i in axes}
    total = None
    for offsets in itertools.product(range(-2, 3), repeat=len(axes)):
        weight = 1.0
        x = list(point)
        for i, off in zip(axes, offsets):
            w = _STENCILS[orders[i]][0][off + 2]
            if not w:
                weight = 0.0
                break
            weight *= float(w)
            x[i] = x[i] + off * steps[i]
        if not weight:
            continue
        value = func(tuple(x))
        contrib = [weight * float(v) for v in value]
        total = contrib if total is None else [a + b for a, b in zip(total, contrib)]
    scale = 1.0
    for i in axes:
        scale *= steps[i] ** orders[i]
    return [v / scale for v in total]


class SmoothMapSpec:
    """A smooth map from an open box in R^m to R^n.

    Polynomial mode stores one :class:`PolyExpr` per output coordinate.
    Black-box mode stores an opaque evaluation rule; derivatives are then
    estimated with five-point central differences of step ``step``.
    Compositions record *guards*, intermediate maps whose values must stay
    inside the next map's domain; they are checked at evaluation time.
    """

    __slots__ = ("domain", "components", "func", "num_vars", "codim", "step", "meta", "guards",
                 "__dict__")

    def __init__(self, components: Sequence[PolyExpr] | None = None, domain: Box | None = None, *,
                 func: Callable | None = None, num_vars: int | None = None,
                 codim: int | None = None, step: float = 1e-4, meta: Mapping | None = None,
                 guards: Sequence = ()):
        if components is not None:
            components = tuple(components)
            if num_vars is None:
                if not components:
                    raise DimensionError("num_vars is required for a map to R^0")
                num_vars = components[0].num_vars
            if any(c.num_vars != num_vars for c in components):
                raise DimensionError("all components must share num_vars")
            codim = len(components)
        elif func is None:
            raise ValueError("either components or func is required")
        elif num_vars is None or codim is None:
            raise ValueError("black-box maps need num_vars and codim")
        self.components = components
        self.func = func
        self.num_vars = num_vars
        self.codim = codim
        self.domain = domain if domain is not None else Box.whole(num_vars)
        if self.domain.dim != num_vars:
            raise DimensionError("domain dimension differs from num_vars")
        self.step = step
        self.meta = dict(meta or {})
        self.guards = tuple(guards)

    # constructors

    @classmethod
    def polynomial(cls, components: Sequence[PolyExpr], domain: Box | None = None,
                   num_vars: int | None = None) -> SmoothMapSpec:
        return cls(components, domain, num_vars=num_vars)

    @classmethod
    def from_strings(cls, texts: Sequence[str], num_vars: int, domain: Box | None = None) -> SmoothMapSpec:
        return cls([parse_expr(t, num_vars) for t in texts], domain, num_vars=num_vars)

    @classmethod
    def black_box(cls, func: Callable, num_vars: int, codim: int, domain: Box | None = None,
                  step: float = 1e-4, meta: Mapping | None = None) -> SmoothMapSpec:
        return cls(None, domain, func=func, num_vars=num_vars, codim=codim, step=step, meta=meta)

    @classmethod
    def identity(cls, n: int, domain: Box | None = None) -> SmoothMapSpec:
        return cls(PolyExpr.variables(n), domain, num_vars=n)

    @classmethod
    def affine(cls, matrix: Sequence[Sequence], offset: Sequence | None = None,
               domain: Box | None = None, num_vars: int | None = None) -> SmoothMapSpec:
        """``x -> matrix @ x + offset``; ``matrix`` has one row per output."""
        if num_vars is None:
            num_vars = len(matrix[0]) if matrix else 0
        xs = PolyExpr.variables(num_vars)
        offset = offset if offset is not None else [0] * len(matrix)
        comps = []
        for row, b in zip(matrix, offset):
            if len(row) != num_vars:
                raise DimensionError("ragged matrix")
            e = PolyExpr.constant(as_rational(b), num_vars)
            for a, x in zip(row, xs):
                if a:
                    e = e + x * as_rational(a)
            comps.append(e)
        return cls(comps, domain, num_vars=num_vars)

    @classmethod
    def constant_map(cls, point: Sequence, num_vars: int, domain: Box | None = None) -> SmoothMapSpec:
        if all(not isinstance(v, float) for v in point):
            return cls([PolyExpr.constant(v, num_vars) for v in point], domain, num_vars=num_vars)
        pt = tuple(point)
        return cls.black_box(lambda x: pt, num_vars, len(pt), domain, meta={"constant": pt})

    # queries

    @property
    def is_polynomial(self) -> bool:
        return self.components is not None

    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (tuple, list)):
            point = tuple(point[0])
        return self.evaluate(point)

    def evaluate(self, point: Sequence, check_domain: bool = True) -> tuple:
        if len(point) != self.num_vars:
            raise DimensionError(f"point has {len(point)} coordinates, map expects {self.num_vars}")
        if check_domain:
            if not self.domain.contains(point):
                raise DomainError(f"point {tuple(point)} is outside the domain box")
            for inner, box in self.guards:
                mid = inner.evaluate(point, check_domain=False)
                if not box.contains(mid):
                    raise DomainError(
                        f"intermediate point {mid} leaves the domain of an outer map")
        return self._raw(point)

    def _raw(self, point: Sequence) -> tuple:
        if self.is_polynomial:
            return tuple(c.evaluate(point) for c in self.components)
        return tuple(self.func(tuple(float(v) for v in point)))

    @cached_property
    def _partials(self) -> list[list[PolyExpr]]:
        return [[c.partial(j) for j in range(self.num_vars)] for c in self.components]

    def jacobian_polys(self) -> list[list[PolyExpr]]:
        if not self.is_polynomial:
            raise TypeError("symbolic Jacobian needs a polynomial map")
        return self._partials

    def is_constant(self) -> bool:
        if self.is_polynomial:
            return all(c.is_constant() for c in self.components)
        return "constant" in self.meta

    def restrict(self, domain: Box) -> SmoothMapSpec:
        """Same rule on a smaller box (the restriction p|V)."""
        return SmoothMapSpec(self.components, domain, func=self.func, num_vars=self.num_vars,
                             codim=self.codim, step=self.step, meta=self.meta, guards=self.guards)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SmoothMapSpec):
            return NotImplemented
        if self.is_polynomial and other.is_polynomial:
            return self.components == other.components and self.domain == other.domain
        return self is other

    def __hash__(self) -> int:
        if self.is_polynomial:
            return hash((self.components, self.domain))
        return id(self)

    def __repr__(self) -> str:
        if self.is_polynomial:
            return f"SmoothMapSpec({[str(c) for c in self.components]})"
        return f"SmoothMapSpec(<black box R^{self.num_vars} -> R^{self.codim}>)"

    def to_json(self) -> dict:
        if not self.is_polynomial:
            raise SchemaError("black-box maps cannot be serialized")
        return {"vars": self.num_vars, "domain": self.domain.to_json(),
                "components": [str(c) for c in self.components]}

    @classmethod
    def from_json(cls, data: Mapping) -> SmoothMapSpec:
        try:
            n = int(data["vars"])
            comps = [parse_expr(t, n) for t in data["components"]]
            domain = Box.from_json(data["domain"]) if "domain" in data else None
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed map JSON: {exc}") from exc
        return cls(comps, domain, num_vars=n)


def compose(f: SmoothMapSpec, g: SmoothMapSpec) -> SmoothMapSpec:
    """The map ``f o g`` on ``g.domain``.

    Containment of ``g``'s image in ``f.domain`` is checked lazily when the
    composite is evaluated.
    """
    if g.codim != f.num_vars:
        raise DimensionError(f"cannot compose: inner map lands in R^{g.codim}, "
                             f"outer map expects R^{f.num_vars}")
    guards = list(g.guards)
    if not f.domain.is_whole:
        guards.append((_unguarded(g), f.domain))
    for inner, box in f.guards:
        guards.append((_compose_raw(inner, _unguarded(g)), box))
    if f.is_polynomial and g.is_polynomial:
        comps = [c.substitute(list(g.components)) for c in f.components]
        return SmoothMapSpec(comps, g.domain, num_vars=g.num_vars, guards=guards)
    raw = _compose_raw(f, g)
    return SmoothMapSpec(None, g.domain, func=raw.func, num_vars=g.num_vars, codim=f.codim,
                         step=min(f.step, g.step), guards=guards)


def _unguarded(m: SmoothMapSpec) -> SmoothMapSpec:
    return SmoothMapSpec(m.components, None, func=m.func, num_vars=m.num_vars, codim=m.codim,
                         step=m.step, meta=m.meta)


def _compose_raw(f: SmoothMapSpec, g: SmoothMapSpec) -> SmoothMapSpec:
    if f.is_polynomial and g.is_polynomial:
        return SmoothMapSpec([c.substitute(list(g.components)) for c in f.components],
                             num_vars=g.num_vars)
    fr, gr = f._raw, g._raw
    return SmoothMapSpec(None, func=lambda x: fr(gr(x)), num_vars=g.num_vars, codim=f.codim,
                         step=min(f.step, g.step))


def jacobian(f: SmoothMapSpec, point: Sequence) -> list[list]:
    """Matrix with entry (i, j) = d f_i / d x_j at ``point``."""
    if not f.domain.contains(point):
        raise DomainError(f"point {tuple(point)} is outside the domain box")
    if f.is_polynomial:
        return [[d.evaluate(point) for d in row] for row in f.jacobian_polys()]
    cols = []
    for j in range(f.num_vars):
        orders = [0] * f.num_vars
        orders[j] = 1
        cols.append(_finite_difference(f._raw, [float(v) for v in point], orders, f.step))
    return [[cols[j][i] for j in range(f.num_vars)] for i in range(f.codim)]


def multi_indices(num_vars: int, order: int) -> list[Exponent]:
    """All exponent tuples of total degree <= order, graded."""
    out = []
    for total in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(num_vars), total):
            exp = [0] * num_vars
            for i in combo:
                exp[i] += 1
            out.append(tuple(exp))
    return out


@dataclass(frozen=True)
class Jet:
    """All partial derivatives up to ``order`` of a map at the origin."""

    num_vars: int
    codim: int
    order: int
    derivatives: Mapping[Exponent, tuple]

    def __post_init__(self):
        expected = len(multi_indices(self.num_vars, self.order))
        if len(self.derivatives) != expected:
            raise ValueError("jet does not hold one entry per multi-index")

    @property
    def value(self) -> tuple:
        return self.derivatives[(0,) * self.num_vars]

    def first_derivatives(self) -> list[tuple]:
        """Row j is d/dx_j of every component."""
        rows = []
        for j in range(self.num_vars):
            e = [0] * self.num_vars
            e[j] = 1
            rows.append(self.derivatives[tuple(e)])
        return rows

    def taylor_polynomials(self) -> list[PolyExpr]:
        comps = []
        for i in range(self.codim):
            terms = {}
            for exp, vals in self.derivatives.items():
                fact = math.prod(math.factorial(e) for e in exp)
                terms[exp] = as_rational(vals[i]) / fact
            comps.append(PolyExpr(self.num_vars, terms))
        return comps

    def agrees_with(self, other: Jet, tol: float = 1e-6) -> bool:
        if (self.num_vars, self.codim, self.order) != (other.num_vars, other.codim, other.order):
            return False
        return all(values_close(a, b, tol) for k in self.derivatives
                   for a, b in zip(self.derivatives[k], other.derivatives[k]))


def values_close(a, b, tol: float = 1e-6) -> bool:
    """Exact equality for rationals, absolute tolerance once a float is involved."""
    if isinstance(a, float) or isinstance(b, float):
        return abs(float(a) - float(b)) <= tol
    return a == b


def jet_at_zero(f: SmoothMapSpec, order: int) -> Jet:
    origin = (Fraction(0),) * f.num_vars
    if not f.domain.contains(origin):
        raise DomainError("the origin is outside the domain of the map")
    derivs = {}
    if f.is_polynomial:
        for exp in multi_indices(f.num_vars, order):
            fact = math.prod(math.factorial(e) for e in exp)
            derivs[exp] = tuple(c.coefficient(exp) * fact for c in f.components)
    else:
        zero = [0.0] * f.num_vars
        base = tuple(float(v) for v in f._raw(origin))
        for exp in multi_indices(f.num_vars, order):
            if not any(exp):
                derivs[exp] = base
            else:
                derivs[exp] = tuple(_finite_difference(f._raw, zero, exp, f.step))
    return Jet(f.num_vars, f.codim, order, derivs)


def jacobian_at_zero(f: SmoothMapSpec) -> list[list]:
    return jacobian(f, (Fraction(0),) * f.num_vars)
