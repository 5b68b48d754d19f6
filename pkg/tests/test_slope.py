from __future__ import annotations

from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from paramex.expr import parse_system
from paramex.interval import Box, Interval, IntervalMatrix
from paramex.parametric import make_approx
from paramex.slope import chain_slope, gslope, jacobian_slope, slope_first, slope_second

from corpus import slope_violations
from oracles import example_system, exact_eval


def test_first_order_slope_of_example():
    sys = example_system()
    S = slope_first(sys, [3, 4, 1], [5, 2, 0]).slope
    assert S == IntervalMatrix.from_floats([[8, 6, 1], [2, 3, 1]])


def test_slope_identity_exact_for_quadratic():
    sys = example_system()
    z, x = [3, 4, 1], [5, 2, 0]
    S = slope_first(sys, z, x).slope
    lhs = [a - b for a, b in zip(exact_eval(sys, x[:2], x[2:]), exact_eval(sys, z[:2], z[2:]))]
    rhs = S @ (Box.point(x) - Box.point(z))
    assert [Fraction(r.lo) for r in rhs] == lhs


def test_second_order_slope_constant_for_quadratic():
    # T_{ijk}: the x1^2 term contributes 1 on (j, k) = (x1, x1), etc.
    sys = example_system()
    T = slope_second(sys, [3, 4, 1], [3, 4, 1], [[0, 5], [0, 5], [0, 2]])
    assert T.slab(0) == IntervalMatrix.from_floats([[1, 0, 0], [0, 0, 0]])
    assert T.slab(1) == IntervalMatrix.from_floats([[0, 1, 0], [1, 0, 0]])
    assert T.slab(2) == IntervalMatrix.from_floats([[0, 0, 1], [0, 0, 0]])


def test_jacobian_slope_slabs():
    sys = example_system()
    T = jacobian_slope(sys, [3, 4, 1], [[2, 4], [3, 5], [0, 2]])
    assert T.select(i=[0]).slab(0) == IntervalMatrix.from_floats([[2, 0]])
    assert T.select(i=[0]).slab(1) == IntervalMatrix.from_floats([[0, 2]])
    assert T.select(i=[1]).slab(0) == IntervalMatrix.from_floats([[0, 1]])
    assert T.select(i=[1]).slab(1) == IntervalMatrix.from_floats([[1, 0]])
    assert T.slab(2) == IntervalMatrix.zeros(2, 2)


def test_box_center_contains_point_centers():
    sys = parse_cubic()
    zbox = [Interval(0.4, 0.6), Interval(-0.1, 0.1), Interval(0.2, 0.2)]
    xbox = [Interval(-1, 1), Interval(-1, 1), Interval(0, 0.5)]
    wide = slope_first(sys, zbox, xbox).slope
    for z in ([0.4, -0.1, 0.2], [0.6, 0.1, 0.2], [0.5, 0.0, 0.2]):
        assert wide.contains(slope_first(sys, z, xbox).slope)


def parse_cubic():
    return parse_system("x1^3 - 2*x1*x2 + s ; x2^3 + x1 - s^2*x2", 2, 1)


def test_chain_rule_for_tangent_approximation():
    sys = example_system()
    ap = make_approx(sys, [3, 4], [1], "tangent")
    g = gslope(ap)
    full = chain_slope(slope_first(sys, [3, 4, 1], [3, 4, 1]), g)
    # derivative of H(x_hat(s), s) at p vanishes for the tangent predictor
    for row in full.entries:
        assert row[0].contains(0.0)
        assert row[0].width() < 1e-14


def test_slope_identity_small_corpus():
    assert slope_violations(20, seed=7) == []


@settings(max_examples=60)
@given(st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=64), min_size=6, max_size=6))
def test_rational_system_slope_identity(vals):
    sys = parse_system("x1/(x2 + 3) - s ; x2 - 1/(x1^2 + 1) + s*x1", 2, 1)
    z, x = vals[:3], vals[3:]
    zf, xf = [float(v) for v in z], [float(v) for v in x]
    S = slope_first(sys, zf, xf).slope
    lhs = [a - b for a, b in zip(exact_eval(sys, xf[:2], xf[2:]), exact_eval(sys, zf[:2], zf[2:]))]
    rhs = S @ (Box.point(xf) - Box.point(zf))
    for r, q in zip(rhs, lhs):
        assert Fraction(r.lo) <= q <= Fraction(r.hi)
