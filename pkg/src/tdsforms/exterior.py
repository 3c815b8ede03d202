"""Alternating multilinear forms on R^n at a single point.

A degree-k form is stored by its coefficients on the basis
``x_I = x_{i1} ^ ... ^ x_{ik}`` indexed by strictly increasing tuples I.
The wedge product carries no factorial normalization, so that
``w1 ^ ... ^ wk (v1, ..., vk) = det(w_j(v_i))``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Sequence

from .errors import DimensionError, NotOrthonormalError, SchemaError
from .expr import as_scalar, values_close

MultiIndex = tuple[int, ...]


def check_multi_index(idx: Sequence[int], dim: int) -> MultiIndex:
    idx = tuple(int(i) for i in idx)
    if any(a >= b for a, b in zip(idx, idx[1:])):
        raise ValueError(f"multi-index {idx} is not strictly increasing")
    if idx and (idx[0] < 0 or idx[-1] >= dim):
        raise DimensionError(f"multi-index {idx} out of range for dimension {dim}")
    return idx


def multi_index_basis(dim: int, degree: int) -> list[MultiIndex]:
    return list(itertools.combinations(range(dim), degree))


def merge_sign(a: MultiIndex, b: MultiIndex) -> int:
    """Sign of the permutation sorting ``a + b``; 0 if they share an index."""
    inversions = 0
    for i in a:
        for j in b:
            if i == j:
                return 0
            if i > j:
                inversions += 1
    return -1 if inversions % 2 else 1


def det(matrix: Sequence[Sequence]):
    """Determinant by Gaussian elimination; exact on rationals."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    a = [[as_scalar(v) for v in row] for row in matrix]
    if any(len(row) != n for row in a):
        raise DimensionError("determinant of a non-square matrix")
    result = Fraction(1)
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            result = -result
        p = a[col][col]
        result = result * p
        for r in range(col + 1, n):
            factor = a[r][col] / p
            if factor:
                for c in range(col, n):
                    a[r][c] = a[r][c] - factor * a[col][c]
    return result


class ExteriorForm:
    """An alternating ``degree``-linear form on R^dim."""

    __slots__ = ("dim", "degree", "_coeffs")

    def __init__(self, dim: int, degree: int, coeffs: Mapping[Sequence[int], object] | None = None):
        if dim < 0 or degree < 0:
            raise DimensionError("dimension and degree must be non-negative")
        clean: dict[MultiIndex, object] = {}
        for idx, c in (coeffs or {}).items():
            idx = check_multi_index(idx, dim)
            if len(idx) != degree:
                raise DimensionError(f"multi-index {idx} does not have length {degree}")
            c = as_scalar(c)
            if c != 0:
                clean[idx] = clean.get(idx, 0) + c
        self.dim = dim
        self.degree = degree
        self._coeffs = {k: v for k, v in clean.items() if v != 0}

    @classmethod
    def zero(cls, dim: int, degree: int) -> ExteriorForm:
        return cls(dim, degree)

    @classmethod
    def scalar(cls, dim: int, value) -> ExteriorForm:
        return cls(dim, 0, {(): value})

    @classmethod
    def basis(cls, dim: int, idx: Sequence[int]) -> ExteriorForm:
        idx = tuple(idx)
        return cls(dim, len(idx), {idx: 1})

    @classmethod
    def covector(cls, vector: Sequence) -> ExteriorForm:
        """The 1-form ``xi -> (xi, vector)``."""
        return cls(len(vector), 1, {(i,): v for i, v in enumerate(vector)})

    @classmethod
    def volume(cls, dim: int) -> ExteriorForm:
        return cls(dim, dim, {tuple(range(dim)): 1})

    @property
    def coeffs(self) -> Mapping[MultiIndex, object]:
        return MappingProxyType(self._coeffs)

    def coeff(self, idx: Sequence[int]):
        return self._coeffs.get(tuple(idx), Fraction(0))

    def as_vector(self) -> list:
        if self.degree != 1:
            raise DimensionError("only 1-forms have a vector representation")
        return [self.coeff((i,)) for i in range(self.dim)]

    def is_zero(self) -> bool:
        return not self._coeffs

    # evaluation

    def evaluate(self, *vectors):
        if len(vectors) != self.degree:
            raise DimensionError(f"a {self.degree}-form takes {self.degree} vectors, got {len(vectors)}")
        for v in vectors:
            if len(v) != self.dim:
                raise DimensionError(f"vector of length {len(v)} in dimension {self.dim}")
        total = Fraction(0)
        for idx, c in self._coeffs.items():
            total = total + c * det([[v[i] for i in idx] for v in vectors])
        return total

    __call__ = evaluate

    # algebra

    def _check_same(self, other: ExteriorForm):
        if not isinstance(other, ExteriorForm):
            raise TypeError("expected an ExteriorForm")
        if other.dim != self.dim:
            raise DimensionError(f"forms live in dimensions {self.dim} and {other.dim}")

    def __add__(self, other: ExteriorForm) -> ExteriorForm:
        self._check_same(other)
        if other.degree != self.degree:
            raise DimensionError("cannot add forms of different degree")
        coeffs = dict(self._coeffs)
        for idx, c in other._coeffs.items():
            coeffs[idx] = coeffs.get(idx, 0) + c
        return ExteriorForm(self.dim, self.degree, coeffs)

    def __neg__(self) -> ExteriorForm:
        return ExteriorForm(self.dim, self.degree, {k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other: ExteriorForm) -> ExteriorForm:
        return self + (-other)

    def __mul__(self, scalar) -> ExteriorForm:
        if isinstance(scalar, ExteriorForm):
            return NotImplemented
        s = as_scalar(scalar)
        return ExteriorForm(self.dim, self.degree, {k: v * s for k, v in self._coeffs.items()})

    __rmul__ = __mul__

    def wedge(self, other: ExteriorForm) -> ExteriorForm:
        self._check_same(other)
        coeffs: dict[MultiIndex, object] = {}
        for i, a in self._coeffs.items():
            for j, b in other._coeffs.items():
                sign = merge_sign(i, j)
                if sign:
                    idx = tuple(sorted(i + j))
                    coeffs[idx] = coeffs.get(idx, 0) + sign * a * b
        return ExteriorForm(self.dim, self.degree + other.degree, coeffs)

    __xor__ = wedge

    def pullback(self, matrix: Sequence[Sequence]) -> ExteriorForm:
        """``L^* self`` for ``L: R^m -> R^dim`` given as a dim x m matrix."""
        if len(matrix) != self.dim:
            raise DimensionError(f"matrix has {len(matrix)} rows, form lives in R^{self.dim}")
        m = len(matrix[0]) if matrix else 0
        if any(len(row) != m for row in matrix):
            raise DimensionError("ragged matrix")
        coeffs: dict[MultiIndex, object] = {}
        for j in multi_index_basis(m, self.degree):
            total = Fraction(0)
            for i, c in self._coeffs.items():
                total = total + c * det([[matrix[r][s] for s in j] for r in i])
            coeffs[j] = total
        return ExteriorForm(m, self.degree, coeffs)

    # comparison and serialization

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExteriorForm):
            return NotImplemented
        return (self.dim, self.degree) == (other.dim, other.degree) and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash((self.dim, self.degree, frozenset(self._coeffs.items())))

    def close_to(self, other: ExteriorForm, tol: float = 1e-9) -> bool:
        if (self.dim, self.degree) != (other.dim, other.degree):
            return False
        keys = set(self._coeffs) | set(other._coeffs)
        return all(values_close(self.coeff(k), other.coeff(k), tol) for k in keys)

    def __repr__(self) -> str:
        if not self._coeffs:
            return f"ExteriorForm(dim={self.dim}, degree={self.degree}, 0)"
        body = " + ".join(f"{c}*x{'^x'.join(map(str, idx))}" if idx else f"{c}"
                          for idx, c in sorted(self._coeffs.items()))
        return f"ExteriorForm(dim={self.dim}, {body})"

    def to_json(self) -> dict:
        out = []
        for idx, c in sorted(self._coeffs.items()):
            if isinstance(c, float):
                out.append({"idx": list(idx), "value": c})
            else:
                out.append({"idx": list(idx), "num": c.numerator, "den": c.denominator})
        return {"dim": self.dim, "degree": self.degree, "coeffs": out}

    @classmethod
    def from_json(cls, data: Mapping) -> ExteriorForm:
        try:
            coeffs = {}
            for entry in data["coeffs"]:
                if "value" in entry:
                    c = float(entry["value"])
                else:
                    c = Fraction(int(entry["num"]), int(entry.get("den", 1)))
                coeffs[tuple(entry["idx"])] = c
            return cls(int(data["dim"]), int(data["degree"]), coeffs)
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed exterior form JSON: {exc}") from exc


def evaluate(form: ExteriorForm, vectors: Sequence[Sequence]):
    return form.evaluate(*vectors)


def wedge(a: ExteriorForm, b: ExteriorForm) -> ExteriorForm:
    return a.wedge(b)


def wedge_all(forms: Sequence[ExteriorForm], dim: int | None = None) -> ExteriorForm:
    if not forms:
        if dim is None:
            raise ValueError("dimension needed for an empty wedge")
        return ExteriorForm.scalar(dim, 1)
    result = forms[0]
    for f in forms[1:]:
        result = result.wedge(f)
    return result


def decomposable_eval(covectors: Sequence[ExteriorForm], vectors: Sequence[Sequence]):
    """``det(w_j(v_i))`` for 1-forms ``w_j``."""
    if len(covectors) != len(vectors):
        raise DimensionError(f"{len(covectors)} covectors but {len(vectors)} vectors")
    for w in covectors:
        if w.degree != 1:
            raise DimensionError("decomposable_eval expects 1-forms")
    return det([[w.evaluate(v) for w in covectors] for v in vectors])


def projection_volume_form(basis: Sequence[Sequence], tol: float = 1e-9) -> ExteriorForm:
    """Oriented k-volume of the orthogonal projection onto span(basis).

    ``basis`` must be orthonormal: exactly for rational entries, within
    ``tol`` when any entry is a float.
    """
    if not basis:
        raise DimensionError("empty basis")
    n = len(basis[0])
    if any(len(b) != n for b in basis):
        raise DimensionError("basis vectors differ in length")
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            dot = sum((as_scalar(x) * as_scalar(y) for x, y in zip(a, b)), Fraction(0))
            if not values_close(dot, 1 if i == j else 0, tol):
                raise NotOrthonormalError(f"basis vectors {i}, {j} have inner product {dot}")
    return wedge_all([ExteriorForm.covector(b) for b in basis])


def pullback_linear(matrix: Sequence[Sequence], form: ExteriorForm) -> ExteriorForm:
    return form.pullback(matrix)
