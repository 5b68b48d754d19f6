from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramex import rounding as rd
from paramex.errors import DomainError, ShapeError
from paramex.interval import (
    Box,
    Interval,
    IntervalMatrix,
    IntervalTensor3,
    in_interior,
    magnitude,
    mat_tensor,
    pow_int,
    quad_form,
    tensor_mat,
    tensor_vec,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def intervals(draw):
    a, b = draw(finite), draw(finite)
    return Interval(min(a, b), max(a, b))


def test_add_exact():
    assert Interval(1, 2) + Interval(3, 4) == Interval(4, 6)


def test_mul_signs():
    assert Interval(-1, 2) * Interval(3, 4) == Interval(-4, 8)


def test_div_by_zero_interval():
    with pytest.raises(DomainError):
        Interval(1, 2) / Interval(0, 1)


def test_empty_propagates():
    e = Interval.empty()
    assert (e + Interval(1, 2)).is_empty
    assert (Interval(1, 2) * e).is_empty


def test_intersect_and_interior():
    assert Interval(2, 4).intersect(Interval(3, 5)) == Interval(3, 4)
    assert Box.from_pairs([[0, 5], [0, 5]]).contains(Box.point([3, 4]))
    assert not in_interior(Interval(2, 3), Interval(2, 4))
    assert in_interior(Interval(2.5, 3), Interval(2, 4))


def test_pow_int_even_straddles_zero():
    assert pow_int(Interval(-2, 1), 2) == Interval(0, 4)
    assert pow_int(Interval(-2, 1), 0) == Interval(1, 1)


def test_rounding_one_third():
    lo, hi = rd.div_down(1.0, 3.0), rd.div_up(1.0, 3.0)
    assert Fraction(lo) < Fraction(1, 3) < Fraction(hi)
    assert rd.next_up(lo) == hi


def test_rounding_exact_ops_stay_thin():
    assert rd.add_down(0.5, 0.25) == rd.add_up(0.5, 0.25) == 0.75
    assert rd.sqrt_down(4.0) == rd.sqrt_up(4.0) == 2.0


def _brackets(lo: float, q: Fraction, hi: float) -> bool:
    # overflow to +-inf is a valid (if useless) bound
    ok_lo = lo == -math.inf or Fraction(lo) <= q
    ok_hi = hi == math.inf or q <= Fraction(hi)
    return ok_lo and ok_hi


@given(finite, finite)
def test_directed_rounding_brackets_exact(a, b):
    qa, qb = Fraction(a), Fraction(b)
    assert _brackets(rd.add_down(a, b), qa + qb, rd.add_up(a, b))
    assert _brackets(rd.mul_down(a, b), qa * qb, rd.mul_up(a, b))
    if b != 0:
        assert _brackets(rd.div_down(a, b), qa / qb, rd.div_up(a, b))


@given(st.floats(min_value=0, max_value=1e12))
def test_sqrt_brackets(a):
    lo, hi = rd.sqrt_down(a), rd.sqrt_up(a)
    assert Fraction(lo) ** 2 <= Fraction(a) <= Fraction(hi) ** 2


@given(intervals(), intervals(), intervals(), intervals())
def test_inclusion_monotone(a, b, c, d):
    big_a, big_b = a.hull(c), b.hull(d)
    for op in (lambda x, y: x + y, lambda x, y: x - y, lambda x, y: x * y):
        assert op(big_a, big_b).contains(op(a, b))
    if not big_b.contains_zero():
        assert (big_a / big_b).contains(a / b)


@settings(max_examples=200)
@given(st.lists(intervals(), min_size=2, max_size=2), st.lists(intervals(), min_size=8, max_size=8))
def test_quad_form_matches_two_step(vs, ts):
    v = Box(vs)
    T = IntervalTensor3([[ts[0:2], ts[2:4]], [ts[4:6], ts[6:8]]])
    q = quad_form(v, T)
    two = tensor_vec(T, v) @ v
    # both enclose the same real quantity; outward rounding keeps them overlapping
    for a, b in zip(q, two):
        assert not a.intersect(b).is_empty


def test_quad_form_ones():
    T = IntervalTensor3([[[1, 1], [1, 1]], [[1, 1], [1, 1]]])
    assert quad_form(Box.point([1, 1]), T) == Box.point([4, 4])


def test_mat_tensor_identity():
    T = IntervalTensor3([[[1, 2], [3, 4]], [[5, 6], [7, 8]]])
    assert mat_tensor(IntervalMatrix.identity(2), T) == T


def test_tensor_rule_indices():
    T = IntervalTensor3([[[1, 2], [3, 4]], [[5, 6], [7, 8]]])
    M = tensor_vec(T, Box.point([1, 10]))
    assert M == IntervalMatrix.from_floats([[21, 43], [65, 87]])
    B = IntervalMatrix.from_floats([[1], [1]])
    assert tensor_mat(T, B) == IntervalTensor3([[[3], [7]], [[11], [15]]])


def test_shape_errors():
    with pytest.raises(ShapeError):
        Box.point([1, 2]) + Box.point([1])
    with pytest.raises(ShapeError):
        IntervalMatrix.identity(2) @ Box.point([1, 2, 3])


def test_magnitude_thin_upper():
    m = magnitude(Box([Interval(-3, 1), Interval(0.5, 2)]))
    assert m == Box.point([3, 2])


def test_json_round_trip():
    b = Box([Interval(-math.inf, 1.5), Interval(0.1, 0.2)])
    assert Box.from_json(b.to_json()) == b
    assert b.to_json()[0][0] == "-inf"
    assert Interval.empty().to_json() is None
