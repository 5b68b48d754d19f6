from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paramex.errors import ApproxLeavesDomain, NonpositiveDiscriminant, ProblemError
from paramex.interval import Box
from paramex.parametric import (
    D_quadratic,
    certify_parameter_box,
    lambda_at,
    make_approx,
    param_bounds,
    regions_at_s,
)

from oracles import branch_zero, example_system, mp_newton


def test_tangent_theta(tangent_cert):
    th = tangent_cert.approx.theta_floats()
    # dx/ds from implicit differentiation at (3, 4, 1): J_x^{-1} J_s = (1/14)(-3 8; 4 -6)(2, 1)
    assert th[0][0] == pytest.approx(-(-3 * 2 + 8 * 1) / 14, abs=1e-15)
    assert th[1][0] == pytest.approx(-(4 * 2 - 6 * 1) / 14, abs=1e-15)


def test_secant_theta_through_second_point(secant_cert):
    th = secant_cert.approx.theta_floats()
    r = math.sqrt(13)
    assert th[0][0] == pytest.approx(3 - r, abs=1e-14)
    assert th[1][0] == pytest.approx(4 - r, abs=1e-14)


def test_tangent_bounds_match_rational_values(tangent_cert):
    b = tangent_cert.bounds
    assert b.G0_bar[0, 0].hi == pytest.approx(51 / 98, abs=1e-12)
    assert b.G0_bar[1, 0].hi == pytest.approx(58 / 98, abs=1e-12)
    for a in b.alpha:
        assert a.lo == pytest.approx(2 / 7, abs=1e-12) and a.width() < 1e-12
    assert b.beta[0].hi == pytest.approx(65 / 49, abs=1e-12)
    assert b.beta[1].hi == pytest.approx(72 / 49, abs=1e-12)


def test_mu_is_min_of_eta_sigma(tangent_cert, secant_cert):
    for c in (tangent_cert, secant_cert):
        assert c.mu == min(c.eta, c.sigma)
        assert 0 < c.mu <= c.mu_bar
        assert c.lambda_mu.lambda_e > c.lambda_mu.lambda_i


def test_tangent_mu_exceeds_secant(tangent_cert, secant_cert):
    assert tangent_cert.mu > secant_cert.mu


def test_s_tilde_is_inner_rounded(tangent_cert):
    c = tangent_cert
    p, mu = c.fixed.p[0], c.mu
    s = c.s_tilde[0]
    assert p - mu <= s.lo and s.hi <= p + mu
    assert s.width() == pytest.approx(2 * mu, rel=1e-14)


def test_D_vanishes_at_mu_lower(tangent_cert, secant_cert):
    for c in (tangent_cert, secant_cert):
        for j, mj in enumerate(c.roots.mu_lower_j):
            D = D_quadratic(c.bounds, mj)[j]
            scale = max(c.bounds.gamma[j].hi, c.bounds.beta[j].hi)
            assert abs(D.mid()) <= 1e-9 * scale


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=0, max_value=1))
def test_lambda_discriminant_equals_mu_quadratic(tangent_cert, t):
    nu = t * tangent_cert.mu_bar * 0.999
    lam = lambda_at(nu, tangent_cert.bounds)
    Dq = D_quadratic(tangent_cert.bounds, nu)
    for a, b in zip(lam.D, Dq):
        assert a.lo == pytest.approx(b.mid(), abs=1e-12)


def test_lambda_fails_beyond_mu_bar(tangent_cert):
    with pytest.raises(NonpositiveDiscriminant):
        lambda_at(tangent_cert.mu_bar * 1.01, tangent_cert.bounds)


def test_enclosures_contain_oracle_zeros(tangent_cert, secant_cert):
    for c in (tangent_cert, secant_cert):
        s = c.s_certified[0]
        for k in range(1, 40):
            t = s.lo + (s.hi - s.lo) * k / 40
            z = branch_zero(t)
            pt = Box.point([float(z[0]), float(z[1])])
            assert c.enclosure_s_mu.contains(pt)
            assert c.exclusion_hull.contains(pt)


def test_regions_at_s_tighter_than_uniform(tangent_cert):
    c = tangent_cert
    sysm = example_system()
    for t in (0.8, 1.0, 1.2):
        at = regions_at_s(sysm, c.fixed, c.approx, [t], c.bounds)
        assert at.lambda_i_s <= c.lambda_i_mu
        z = branch_zero(t)
        assert at.R_i_s.contains(Box.point([float(z[0]), float(z[1])]))


def test_regions_at_s_requires_reference_box(tangent_cert):
    with pytest.raises(ValueError):
        regions_at_s(example_system(), tangent_cert.fixed, tangent_cert.approx, [2.5], tangent_cert.bounds)


def test_constant_predictor_is_sound(tangent_cert):
    # H'_x does not depend on s here, so Theta = 0 removes the alpha term entirely
    sysm = example_system()
    fixed = tangent_cert.fixed
    ap = make_approx(sysm, fixed.z, fixed.p, "linear", theta=[[0.0], [0.0]])
    c = certify_parameter_box(sysm, fixed, ap, [[0.5, 1.5]], sysm.X)
    assert all(a.hi == 0.0 for a in c.bounds.alpha)
    s = c.s_certified[0]
    for k in range(1, 20):
        z = branch_zero(s.lo + (s.hi - s.lo) * k / 20)
        assert c.enclosure_s_mu.contains(Box.point([float(z[0]), float(z[1])]))


def test_approximation_leaving_state_box(tangent_cert):
    sysm = example_system()
    fixed = tangent_cert.fixed
    ap = make_approx(sysm, fixed.z, fixed.p, "linear", theta=[[10.0], [10.0]])
    with pytest.raises(ApproxLeavesDomain):
        param_bounds(sysm, fixed, ap, [[0, 2]], sysm.X)


def test_center_outside_parameter_box(tangent_cert):
    with pytest.raises(ProblemError):
        param_bounds(example_system(), tangent_cert.fixed, tangent_cert.approx, [[1.5, 2]], None)


def test_secant_needs_distinct_parameter(tangent_cert):
    with pytest.raises(ProblemError):
        make_approx(example_system(), [3, 4], [1], "secant", x1=[3, 4], s1=1.0)


def test_random_s_exclusion(tangent_cert):
    # Newton started inside R_e(s) \ R_i(s) never settles on a zero there
    c = tangent_cert
    sysm = example_system()
    rng = random.Random(11)
    s = c.s_certified[0]
    for _ in range(10):
        t = rng.uniform(s.lo, s.hi)
        at = regions_at_s(sysm, c.fixed, c.approx, [t], c.bounds)
        for _ in range(10):
            x = [rng.uniform(b.lo, b.hi) for b in at.R_e_s]
            z = mp_newton(sysm, [t], x)
            if z is None:
                continue
            zb = Box.point(z)
            assert at.R_i_s.contains(zb) or not at.R_e_s.interior_contains(zb)
