import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pickdecomp.errors import DimensionError
from pickdecomp.lattice import (BSet, Box, Diff, Orthant, ShiftedOrthant, Singleton, XSingle,
                                XUnion, box_points, contains, enumerate_set, graded_lex_key,
                                leq, sort_graded_lex)


def test_leq_examples():
    assert leq((0, 0), (1, 1))
    assert not leq((1, 0), (0, 1))
    assert not leq((0, 1), (1, 0))
    for a in [(0,), (3, 1), (2, 0, 5)]:
        assert leq(a, a)


def test_leq_dimension_mismatch():
    with pytest.raises(DimensionError):
        leq((0, 0), (0, 0, 0))


def test_contains_examples():
    assert contains(BSet((1, 1)), (0, 3))
    assert not contains(BSet((1, 1)), (1, 1))
    assert contains(XUnion({2}, (2, 1)), (5, 0))
    assert (0, 3) in BSet((1, 1))


def test_enumerate_examples():
    assert enumerate_set(BSet((1, 1)), (2, 2)) == [(0, 0), (0, 1), (1, 0)]
    assert enumerate_set(XSingle(1, (2, 1)), (3, 3)) == [
        (0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (1, 2)]
    assert enumerate_set(Orthant(2), (2, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_empty_union_is_origin():
    assert enumerate_set(XUnion(set(), (2, 2)), (4, 4)) == [(0, 0)]


def test_zero_degree_component_gives_empty_single():
    assert enumerate_set(XSingle(2, (1, 0)), (3, 3)) == []


def test_graded_lex_order():
    pts = [(1, 1), (0, 2), (2, 0), (0, 0), (1, 0)]
    assert sort_graded_lex(pts) == [(0, 0), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert graded_lex_key((0, 2)) < graded_lex_key((1, 1))


def test_box_points_rejects_empty():
    with pytest.raises(ValueError):
        box_points((0, 3))


def test_set_algebra():
    n = (2, 1)
    box = (4, 4)
    assert set(enumerate_set(BSet(n), box)) == set(enumerate_set(Diff(Orthant(2), ShiftedOrthant(n)), box))
    both = XSingle(1, n) & XSingle(2, n)
    assert set(enumerate_set(both, box)) == {a for a in enumerate_set(Box(box), box)
                                             if a[0] < 2 and a[1] < 1}
    assert enumerate_set(Singleton((1, 2)) | Singleton((0, 0)), box) == [(0, 0), (1, 2)]
    assert enumerate_set(Box((2, 1)) - Singleton((0, 0)), box) == [(1, 0)]


dims = st.integers(min_value=1, max_value=3)


@st.composite
def degree_and_box(draw):
    d = draw(dims)
    n = tuple(draw(st.lists(st.integers(0, 3), min_size=d, max_size=d)))
    N = draw(st.integers(max(n) if max(n) > 0 else 1, 6))
    return d, n, N


@settings(max_examples=60, deadline=None)
@given(degree_and_box())
def test_counting_identity(case):
    d, n, N = case
    expected = N ** d - int(np.prod([N - k for k in n]))
    assert len(enumerate_set(BSet(n), (N,) * d)) == expected


@settings(max_examples=40, deadline=None)
@given(degree_and_box(), st.data())
def test_union_monotone_in_S(case, data):
    d, n, N = case
    box = (N,) * d
    full = list(range(1, d + 1))
    S2 = set(data.draw(st.lists(st.sampled_from(full), unique=True, min_size=1)))
    S1 = set(data.draw(st.lists(st.sampled_from(sorted(S2)), unique=True)))
    small = set(enumerate_set(XUnion(S1, n), box)) if S1 else set()
    assert small <= set(enumerate_set(XUnion(S2, n), box))


@settings(max_examples=40, deadline=None)
@given(degree_and_box())
def test_B_is_union_of_singles(case):
    d, n, N = case
    box = (N,) * d
    union = set()
    for j in range(1, d + 1):
        union |= set(enumerate_set(XSingle(j, n), box))
    assert union == set(enumerate_set(BSet(n), box))


@settings(max_examples=40, deadline=None)
@given(degree_and_box(), st.data())
def test_contains_matches_enumeration(case, data):
    d, n, N = case
    box = (N,) * d
    S = set(data.draw(st.lists(st.sampled_from(range(1, d + 1)), unique=True, min_size=1)))
    for expr in (BSet(n), XUnion(S, n), XSingle(min(S), n)):
        listed = set(enumerate_set(expr, box))
        for a in itertools.product(*(range(N) for _ in range(d))):
            assert contains(expr, a) == (a in listed)
