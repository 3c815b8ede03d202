from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tdsforms.errors import DimensionError, NotOrthonormalError
from tdsforms.exterior import (ExteriorForm, decomposable_eval, det, merge_sign, multi_index_basis,
                               projection_volume_form, wedge_all)

rationals = st.fractions(min_value=-3, max_value=3, max_denominator=5)


def _perm_sign(perm) -> int:
    sign = 1
    for i, j in itertools.combinations(range(len(perm)), 2):
        if perm[i] > perm[j]:
            sign = -sign
    return sign


def _leibniz_det(m) -> Fraction:
    n = len(m)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        term = Fraction(_perm_sign(perm))
        for i in range(n):
            term *= m[i][perm[i]]
        total += term
    return total


@st.composite
def forms(draw, dim, degree):
    coeffs = {idx: draw(rationals) for idx in multi_index_basis(dim, degree)}
    return ExteriorForm(dim, degree, coeffs)


@st.composite
def form_triples(draw):
    dim = draw(st.integers(1, 5))
    ks = [draw(st.integers(0, min(3, dim))) for _ in range(3)]
    return dim, [draw(forms(dim, k)) for k in ks]


def vectors(dim, count):
    return st.lists(st.lists(rationals, min_size=dim, max_size=dim), min_size=count, max_size=count)


def test_frozen_values():
    vol = ExteriorForm.volume(2)
    assert vol.evaluate([1, 0], [0, 1]) == 1
    assert vol.evaluate([1, 2], [3, 4]) == -2
    dx, dy, dz = (ExteriorForm.basis(3, (i,)) for i in range(3))
    assert wedge_all([dx, dy, dz]) == ExteriorForm.volume(3)
    assert dy.wedge(dx) == ExteriorForm(3, 2, {(0, 1): -1})
    assert merge_sign((1,), (0,)) == -1
    assert merge_sign((0, 2), (1,)) == -1
    assert merge_sign((0,), (0,)) == 0


def test_repeated_index_and_dimension_errors():
    with pytest.raises(ValueError):
        ExteriorForm(3, 2, {(1, 1): 1})
    with pytest.raises(DimensionError):
        ExteriorForm(2, 1, {(2,): 1})
    with pytest.raises(DimensionError):
        ExteriorForm.volume(2).evaluate([1, 0])
    with pytest.raises(DimensionError):
        ExteriorForm.basis(2, (0,)).wedge(ExteriorForm.basis(3, (0,)))


def test_projection_volume_form():
    w = projection_volume_form([[1, 0, 0], [0, 1, 0]])
    assert w == ExteriorForm(3, 2, {(0, 1): 1})
    assert w.evaluate([1, 0, 5], [0, 1, 7]) == 1
    with pytest.raises(NotOrthonormalError):
        projection_volume_form([[1, 1, 0], [0, 1, 0]])


def test_json_round_trip():
    w = ExteriorForm(4, 2, {(0, 3): Fraction(-2, 7), (1, 2): 5})
    assert ExteriorForm.from_json(w.to_json()) == w


@settings(max_examples=80, deadline=None)
@given(form_triples())
def test_wedge_is_graded_commutative_and_associative(data):
    _dim, (a, b, c) = data
    assert a.wedge(b) == b.wedge(a) * (-1) ** (a.degree * b.degree)
    assert a.wedge(b).wedge(c) == a.wedge(b.wedge(c))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_decomposable_determinant(data):
    dim = data.draw(st.integers(1, 5))
    k = data.draw(st.integers(1, min(3, dim)))
    ws = [data.draw(forms(dim, 1)) for _ in range(k)]
    vs = data.draw(vectors(dim, k))
    expected = _leibniz_det([[w.evaluate(v) for w in ws] for v in vs])
    assert wedge_all(ws).evaluate(*vs) == expected
    assert decomposable_eval(ws, vs) == expected


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_wedge_matches_alternation_formula(data):
    dim = data.draw(st.integers(1, 4))
    k = data.draw(st.integers(0, min(2, dim)))
    l = data.draw(st.integers(0, min(4 - k, dim - k)))
    a, b = data.draw(forms(dim, k)), data.draw(forms(dim, l))
    vs = data.draw(vectors(dim, k + l))
    total = Fraction(0)
    for perm in itertools.permutations(range(k + l)):
        total += _perm_sign(perm) * a.evaluate(*[vs[i] for i in perm[:k]]) * b.evaluate(*[vs[i] for i in perm[k:]])
    fact = 1
    for i in range(2, k + 1):
        fact *= i
    for i in range(2, l + 1):
        fact *= i
    assert a.wedge(b).evaluate(*vs) == total / fact


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(rationals, min_size=4, max_size=4), min_size=4, max_size=4), st.integers(1, 4))
def test_det_matches_leibniz(m, n):
    sub = [row[:n] for row in m[:n]]
    assert det(sub) == _leibniz_det(sub)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_pullback_is_functorial_and_respects_wedge(data):
    dim, p, q = (data.draw(st.integers(1, 4)) for _ in range(3))
    k = data.draw(st.integers(0, min(2, dim)))
    a, b = data.draw(forms(dim, k)), data.draw(forms(dim, 1))
    L = data.draw(st.lists(st.lists(rationals, min_size=p, max_size=p), min_size=dim, max_size=dim))
    M = data.draw(st.lists(st.lists(rationals, min_size=q, max_size=q), min_size=p, max_size=p))
    LM = [[sum(L[i][t] * M[t][j] for t in range(p)) for j in range(q)] for i in range(dim)]
    assert a.pullback(LM) == a.pullback(L).pullback(M)
    assert a.wedge(b).pullback(L) == a.pullback(L).wedge(b.pullback(L))
    vs = data.draw(vectors(p, k))
    assert a.pullback(L).evaluate(*vs) == a.evaluate(*[[sum(L[i][j] * v[j] for j in range(p)) for i in range(dim)]
                                                       for v in vs])
