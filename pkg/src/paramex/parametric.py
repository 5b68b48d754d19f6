"""Feasible parameter boxes around a regular parameter value.

Given a fixed-parameter certificate at (z, p) and an affine approximation
x_hat(s) = z + Theta (s - p), bound how the fixed-parameter quantities
degrade as s moves away from p and find the largest radius mu for which
every s with |s - p| <= mu y still has inclusion and exclusion boxes
around x_hat(s).

Bound quantities are intervals whose ``.hi`` is the rigorous upper bound.
Whatever must be underestimated (w, D, lambda_e, mu) is rounded down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rounding as rd
from .errors import (
    ApproxLeavesDomain,
    InclusionLeavesDomain,
    LambdaOrderViolation,
    NegativeInnerDiscriminant,
    NoFeasibleEta,
    NoFeasibleSigma,
    NonpositiveDiscriminant,
    ProblemError,
    ShapeError,
)
from .expr import System
from .interval import (
    Box,
    Interval,
    IntervalMatrix,
    IntervalTensor3,
    coerce,
    magnitude,
    mat_tensor,
    quad_form,
    tensor_mat,
    tensor_vec,
)
from .regions import FixedCertificate, box_around, lambda_roots, upper, upper_matrix, upper_tensor
from .slope import gslope, jacobian_slope, slope_first, slope_second
from .verify import _check_regular

INF = math.inf
DEFAULT_TOL = 1e-9


# --------------------------------------------------------------------------
# approximation functions


@dataclass(frozen=True)
class ApproxFn:
    """x_hat(s) = z + Theta (s - p) with a binary64 matrix Theta.

    Theta is fixed to floats, so x_hat is an exactly known affine map and
    only its evaluation needs rounding control.
    """

    kind: str
    z: tuple[float, ...]
    p: tuple[float, ...]
    theta: IntervalMatrix
    second_point: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __call__(self, s) -> Box:
        ds = Box(coerce(si) if not isinstance(si, (tuple, list)) else Interval(*si) for si in s) - Box.point(self.p)
        return Box.point(self.z) + self.theta @ ds

    def theta_floats(self) -> list[list[float]]:
        return [[a.lo for a in row] for row in self.theta.entries]


def make_approx(
    sys: System,
    z: Sequence[float],
    p: Sequence[float],
    kind: str = "tangent",
    *,
    x1=None,
    s1=None,
    theta=None,
) -> ApproxFn:
    """Tangent, secant (through (x1, s1)) or user-supplied linear predictor."""
    z = tuple(float(t) for t in z)
    p = tuple(float(t) for t in p)
    n, m = sys.n, sys.p
    second = None
    if kind == "tangent":
        J = np.array(sys.jacobian_float(list(z) + list(p)), dtype=float)
        Jx, Js = J[:, :n], J[:, n:]
        _check_regular(Jx, f"at z={list(z)}, p={list(p)}")
        th = -np.linalg.solve(Jx, Js) if m else np.zeros((n, 0))
        rows = th.tolist()
    elif kind == "secant":
        if m != 1:
            raise ProblemError("secant approximation is only defined for a single parameter")
        if x1 is None or s1 is None:
            raise ProblemError("secant approximation needs a second point x1 and parameter s1")
        xs = [coerce(v) for v in x1]
        sv = coerce(s1[0] if isinstance(s1, (list, tuple)) else s1)
        ds = sv - coerce(p[0])
        if ds.contains_zero():
            raise ProblemError("secant parameter s1 must differ from p")
        rows = [[((xi - coerce(zi)) / ds).mid()] for xi, zi in zip(xs, z)]
        second = (tuple(x.mid() for x in xs), (sv.mid(),))
    elif kind == "linear":
        if theta is None:
            raise ProblemError("linear approximation needs theta")
        rows = [[float(v) for v in (r if isinstance(r, (list, tuple)) else [r])] for r in theta]
    else:
        raise ProblemError(f"unknown approximation kind {kind!r}")
    if len(rows) != n or any(len(r) != m for r in rows):
        raise ShapeError(f"Theta must be {n} x {m}")
    return ApproxFn(kind, z, p, IntervalMatrix.from_floats(rows), second)


# --------------------------------------------------------------------------
# bounds


@dataclass(frozen=True)
class ParamBounds:
    G0_bar: IntervalMatrix  # n x p
    A_bar: IntervalTensor3  # n x n x p
    Bfrak_bar: IntervalTensor3  # n x n x n
    y: tuple[float, ...]
    v: tuple[float, ...]
    w: tuple[float, ...]  # lower bounds from the fixed certificate
    b: tuple[float, ...]  # upper bounds from the fixed certificate
    afrak: tuple[Interval, ...]
    alpha: tuple[Interval, ...]
    beta: tuple[Interval, ...]
    gamma: tuple[Interval, ...]
    G0y: tuple[Interval, ...]
    sref: Box
    xref: Box

    @property
    def n(self) -> int:
        return len(self.v)


def _as_box(b) -> Box:
    if isinstance(b, Box):
        return b
    return Box(Interval(*v) if isinstance(v, (tuple, list)) else coerce(v) for v in b)


def param_bounds(
    sys: System,
    fixed: FixedCertificate,
    approx: ApproxFn,
    sref,
    xref=None,
    y: Sequence[float] | None = None,
) -> ParamBounds:
    n, m = sys.n, sys.p
    sref = _as_box(sref)
    xref = _as_box(xref) if xref is not None else fixed.xbox
    y = tuple(float(t) for t in (y or [1.0] * m))
    if len(y) != m or not all(t > 0 for t in y):
        raise ValueError("parameter scaling y must be a positive vector of length p")
    if not sref.contains(Box.point(fixed.p)):
        raise ProblemError("the center p must lie in the parameter reference box")
    xs = approx(sref)
    if not xref.contains(xs):
        raise ApproxLeavesDomain(
            "x_hat(sref) is not contained in the state reference box",
            details={"x_hat_sref": xs.to_json(), "xref": xref.to_json()},
        )
    C = fixed.C
    g = gslope(approx, fixed.p, sref)
    Sg = magnitude(g.full)
    gp = list(fixed.z) + list(fixed.p)
    gs = list(xs) + list(sref)

    SH = slope_first(sys, gp, gs).slope
    G0 = magnitude(C @ SH) @ Sg
    SJ = jacobian_slope(sys, gp, gs)
    A = tensor_mat(magnitude(mat_tensor(C, SJ)), Sg)
    T = slope_second(sys, gs, gs, list(xref) + list(sref)).select(j=range(n), k=range(n))
    Bf = magnitude(mat_tensor(C, T))

    v = fixed.v
    vb, yb = Box.point(v), Box.point(y)
    w = tuple(t.lo for t in fixed.w)
    b = upper(fixed.bounds.b_bar)
    afrak = quad_form(vb, upper_tensor(Bf))
    alpha = tensor_vec(upper_tensor(A), yb) @ vb
    G0y = upper_matrix(G0) @ yb
    two, four = Interval(2.0, 2.0), Interval(4.0, 4.0)
    beta, gamma = [], []
    for j in range(n):
        aj = Interval(afrak[j].hi, afrak[j].hi)
        wj = Interval(w[j], w[j])
        beta.append(alpha[j] * wj + two * aj * G0y[j])
        gamma.append(wj * wj - four * aj * Interval(b[j], b[j]))
    return ParamBounds(
        G0_bar=G0,
        A_bar=A,
        Bfrak_bar=Bf,
        y=y,
        v=v,
        w=w,
        b=b,
        afrak=tuple(afrak),
        alpha=tuple(alpha),
        beta=tuple(beta),
        gamma=tuple(gamma),
        G0y=tuple(G0y),
        sref=sref,
        xref=xref,
    )


# --------------------------------------------------------------------------
# mu


@dataclass(frozen=True)
class MuRoots:
    mu_lower_j: tuple[float, ...]
    mu_upper_j: tuple[float, ...]

    @property
    def mu_bar(self) -> float:
        return min(self.mu_lower_j)


def mu_roots(bounds: ParamBounds) -> MuRoots:
    """Roots of alpha^2 mu^2 - 2 beta mu + gamma, the small one rounded down.

    The small root is evaluated as gamma / (beta + sqrt(beta^2 - alpha^2 gamma)),
    which also covers alpha = 0 (giving gamma / (2 beta)).
    """
    lows, ups = [], []
    for j in range(bounds.n):
        al, be, ga = bounds.alpha[j], bounds.beta[j], bounds.gamma[j]
        if ga.hi <= 0.0:
            lows.append(0.0)
            ups.append(0.0)
            continue
        if be.hi <= 0.0:
            lows.append(INF)
            ups.append(INF)
            continue
        inner = be * be - al * al * ga
        if inner.hi < 0.0:
            raise NegativeInnerDiscriminant(j, details={"inner": inner.to_json()})
        root = Interval(max(inner.lo, 0.0), inner.hi).sqrt()
        den = be + root
        if den.hi <= 0.0:
            lows.append(INF)
        else:
            lows.append(rd.div_down(max(ga.lo, 0.0), den.hi))
        a2 = al * al
        ups.append(INF if a2.lo <= 0.0 else rd.div_up(den.hi, a2.lo))
    return MuRoots(tuple(lows), tuple(ups))


def D_quadratic(bounds: ParamBounds, nu: float) -> tuple[Interval, ...]:
    """alpha^2 nu^2 - 2 beta nu + gamma, componentwise."""
    N = Interval(nu, nu)
    two = Interval(2.0, 2.0)
    return tuple(
        a * a * N * N - two * b * N + g for a, b, g in zip(bounds.alpha, bounds.beta, bounds.gamma)
    )


@dataclass(frozen=True)
class LambdaAt:
    nu: float
    b: tuple[float, ...]  # upper bounds on b_frak(nu)
    w: tuple[float, ...]  # lower bounds on w_frak(nu)
    D: tuple[Interval, ...]
    lambda_e_j: tuple[float, ...]
    lambda_i_j: tuple[float, ...]

    @property
    def lambda_e(self) -> float:
        return min(self.lambda_e_j)

    @property
    def lambda_i(self) -> float:
        return max(self.lambda_i_j)


def lambda_at(nu: float, bounds: ParamBounds, fixed: FixedCertificate | None = None) -> LambdaAt:
    """Uniform lambda pair valid for every s with |s - p| <= nu y."""
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    N = Interval(nu, nu)
    bs, ws, Ds, les, lis = [], [], [], [], []
    for j in range(bounds.n):
        bj = (Interval(bounds.b[j], bounds.b[j]) + N * Interval(bounds.G0y[j].hi, bounds.G0y[j].hi)).hi
        wj = (Interval(bounds.w[j], bounds.w[j]) - N * Interval(bounds.alpha[j].hi, bounds.alpha[j].hi)).lo
        D, le, li = lambda_roots(wj, bounds.afrak[j].hi, bj, j)
        bs.append(bj)
        ws.append(wj)
        Ds.append(D)
        les.append(le)
        lis.append(li)
    return LambdaAt(nu, tuple(bs), tuple(ws), tuple(Ds), tuple(les), tuple(lis))


def s_box(p: Sequence[float], nu: float, y: Sequence[float], *, outward: bool) -> Box:
    """[p - nu y, p + nu y], rounded outward or inward."""
    return box_around(p, nu, y, outward=outward)


def _bisect(pred, upper: float, tol: float) -> float:
    """Largest value in [0, upper] satisfying a monotone predicate (pred(0) holds)."""
    if upper <= 0.0 or pred(upper):
        return upper
    lo, hi = 0.0, upper
    while hi - lo > tol * upper:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _eta_ok(nu: float, bounds: ParamBounds) -> bool:
    try:
        lam = lambda_at(nu, bounds)
    except NonpositiveDiscriminant:
        return False
    return lam.lambda_e > lam.lambda_i


def find_eta(bounds: ParamBounds, fixed: FixedCertificate | None = None, upper: float | None = None, tol: float = DEFAULT_TOL) -> float:
    upper = mu_roots(bounds).mu_bar if upper is None else upper
    if not _eta_ok(0.0, bounds):
        raise NoFeasibleEta("lambda_e > lambda_i fails already at nu = 0")
    if math.isinf(upper):
        raise ProblemError("no finite search limit for eta")
    return _bisect(lambda t: _eta_ok(t, bounds), upper, tol)


def _sigma_ok(nu: float, bounds: ParamBounds, approx: ApproxFn, xbox: Box) -> bool:
    try:
        lam = lambda_at(nu, bounds)
    except NonpositiveDiscriminant:
        return False
    sb = s_box(approx.p, nu, bounds.y, outward=True).intersect(bounds.sref)
    xs = approx(sb)
    r = [rd.mul_up(lam.lambda_i, vj) for vj in bounds.v]
    grown = Box(Interval(rd.sub_down(c.lo, rj), rd.add_up(c.hi, rj)) for c, rj in zip(xs, r))
    return xbox.contains(grown)


def find_sigma(
    bounds: ParamBounds,
    approx: ApproxFn,
    fixed: FixedCertificate | None = None,
    xbox: Box | None = None,
    upper: float | None = None,
    tol: float = DEFAULT_TOL,
) -> float:
    xbox = bounds.xref if xbox is None else xbox
    upper = mu_roots(bounds).mu_bar if upper is None else upper
    if not _sigma_ok(0.0, bounds, approx, xbox):
        raise NoFeasibleSigma("the inclusion box at nu = 0 is not contained in the state box")
    if math.isinf(upper):
        raise ProblemError("no finite search limit for sigma")
    return _bisect(lambda t: _sigma_ok(t, bounds, approx, xbox), upper, tol)


# --------------------------------------------------------------------------
# certificate


@dataclass(frozen=True)
class ParamCertificate:
    fixed: FixedCertificate
    approx: ApproxFn
    bounds: ParamBounds
    roots: MuRoots
    eta: float
    sigma: float
    mu: float
    lambda_eta: LambdaAt
    lambda_mu: LambdaAt
    s_tilde: Box  # [p - mu y, p + mu y] rounded inward
    s_certified: Box  # s_tilde intersected with sref
    enclosure_s_mu: Box
    enclosure_s_ref: Box
    exclusion_hull: Box
    notes: tuple[str, ...] = field(default=())

    @property
    def mu_bar(self) -> float:
        return self.roots.mu_bar

    @property
    def lambda_e_mu(self) -> float:
        return self.lambda_mu.lambda_e

    @property
    def lambda_i_mu(self) -> float:
        return self.lambda_mu.lambda_i

    @property
    def binding(self) -> str:
        return "sigma" if self.sigma < self.eta else "eta"


def _grow(xs: Box, lam: float, v, *, outward: bool) -> Box:
    out = []
    for c, vj in zip(xs, v):
        if outward:
            r = rd.mul_up(lam, vj)
            out.append(Interval(rd.sub_down(c.lo, r), rd.add_up(c.hi, r)))
        else:
            r = rd.mul_down(lam, vj) if math.isfinite(lam) else INF
            lo, hi = rd.sub_up(c.hi, r), rd.add_down(c.lo, r)
            out.append(Interval(lo, hi) if lo <= hi else Interval(c.mid(), c.mid()))
    return Box(out)


def certify_parameter_box(
    sys: System,
    fixed: FixedCertificate,
    approx: ApproxFn,
    sref=None,
    xref=None,
    y: Sequence[float] | None = None,
    *,
    tol_eta: float = DEFAULT_TOL,
    tol_sigma: float = DEFAULT_TOL,
    bounds: ParamBounds | None = None,
) -> ParamCertificate:
    """Certified parameter box around p together with its solution enclosures.

    For every s in the interior of ``s_certified`` the box
    x_hat(s) + [-1, 1] lambda_i_mu v holds a zero of H(., s), and no other
    zero lies in the interior of x_hat(s) + [-1, 1] lambda_e_mu v.
    """
    sref = sys.S if sref is None else _as_box(sref)
    xref = fixed.xbox if xref is None else _as_box(xref)
    bounds = bounds or param_bounds(sys, fixed, approx, sref, xref, y)
    roots = mu_roots(bounds)
    limit = roots.mu_bar
    if math.isinf(limit):
        # no component restricts mu; the reference box is the natural limit
        limit = max((max(pk - s.lo, s.hi - pk) / yk for pk, s, yk in zip(fixed.p, sref, bounds.y)), default=0.0)
    eta = find_eta(bounds, fixed, limit, tol_eta)
    sigma = find_sigma(bounds, approx, fixed, xref, limit, tol_sigma)
    mu = min(eta, sigma)
    if not mu > 0.0:
        cls = InclusionLeavesDomain if sigma <= eta else LambdaOrderViolation
        raise cls(f"no positive parameter radius (eta={eta!r}, sigma={sigma!r})", details={"eta": eta, "sigma": sigma})

    # direct re-verification at the final radius
    lam_mu = lambda_at(mu, bounds)
    if not lam_mu.lambda_e > lam_mu.lambda_i:
        raise LambdaOrderViolation("lambda order fails at the final radius", details={"mu": mu})
    if not _sigma_ok(mu, bounds, approx, xref):
        raise InclusionLeavesDomain("inclusion condition fails at the final radius", details={"mu": mu})
    lam_eta = lambda_at(eta, bounds)

    p, yv, v = fixed.p, bounds.y, fixed.v
    s_tilde = s_box(p, mu, yv, outward=False)
    s_cert = s_tilde.intersect(sref)
    s_out = s_box(p, mu, yv, outward=True).intersect(sref)
    xs_mu = approx(s_out)
    enc_mu = _grow(xs_mu, lam_mu.lambda_i, v, outward=True)
    enc_ref = _grow(approx(sref), lam_mu.lambda_i, v, outward=True)
    excl = _grow(xs_mu, lam_mu.lambda_e, v, outward=True).intersect(xref)
    return ParamCertificate(
        fixed=fixed,
        approx=approx,
        bounds=bounds,
        roots=roots,
        eta=eta,
        sigma=sigma,
        mu=mu,
        lambda_eta=lam_eta,
        lambda_mu=lam_mu,
        s_tilde=s_tilde,
        s_certified=s_cert,
        enclosure_s_mu=enc_mu,
        enclosure_s_ref=enc_ref,
        exclusion_hull=excl,
    )


# --------------------------------------------------------------------------
# regions at a single parameter value


@dataclass(frozen=True)
class EnclosureAtS:
    s: tuple[float, ...]
    x_hat: Box
    b: tuple[float, ...]
    w: tuple[float, ...]
    D: tuple[Interval, ...]
    lambda_e_j: tuple[float, ...]
    lambda_i_j: tuple[float, ...]
    R_i_s: Box
    R_e_s: Box

    @property
    def lambda_e_s(self) -> float:
        return min(self.lambda_e_j)

    @property
    def lambda_i_s(self) -> float:
        return max(self.lambda_i_j)

    @property
    def M_u(self) -> Box:
        """{x : |x - x_hat(s)| <= lambda_i_s v}, enclosed outward."""
        return self.R_i_s


def regions_at_s(
    sys: System,
    fixed: FixedCertificate,
    approx: ApproxFn,
    s: Sequence[float],
    bounds: ParamBounds,
) -> EnclosureAtS:
    """Inclusion and exclusion boxes at one parameter value using bounds exact in s.

    G_0(s) and A(s) are slopes between g(p) and the single point g(s); the
    second-order bound is the box-wide one, so ``s`` must lie in ``bounds.sref``.
    """
    n = sys.n
    s = tuple(float(t) for t in s)
    if not bounds.sref.contains(Box.point(s)):
        raise ValueError("s must lie in the parameter reference box of the bounds")
    C, v = fixed.C, fixed.v
    xs = approx(s)
    g = gslope(approx)
    Sg = magnitude(g.full)
    gp = list(fixed.z) + list(fixed.p)
    gs = list(xs) + [coerce(t) for t in s]
    ytil = Box(abs(coerce(si) - coerce(pi)) for si, pi in zip(s, fixed.p))
    G0 = magnitude(C @ slope_first(sys, gp, gs).slope) @ Sg
    A = tensor_mat(magnitude(mat_tensor(C, jacobian_slope(sys, gp, gs))), Sg)
    b_s = Box(coerce(bj) for bj in fixed.bounds.b_bar.hi()) + upper_matrix(G0) @ Box(Interval(t.hi, t.hi) for t in ytil)
    B0s = upper_matrix(fixed.bounds.B0) + upper_matrix(tensor_vec(upper_tensor(A), Box(Interval(t.hi, t.hi) for t in ytil)))
    vb = Box.point(v)
    w_s = vb - upper_matrix(B0s) @ vb
    bs, ws, Ds, les, lis = [], [], [], [], []
    for j in range(n):
        D, le, li = lambda_roots(w_s[j].lo, bounds.afrak[j].hi, b_s[j].hi, j)
        bs.append(b_s[j].hi)
        ws.append(w_s[j].lo)
        Ds.append(D)
        les.append(le)
        lis.append(li)
    lam_e, lam_i = min(les), max(lis)
    if not lam_e > lam_i:
        raise LambdaOrderViolation(f"lambda_e = {lam_e!r} does not exceed lambda_i = {lam_i!r} at s = {s}")
    R_i = _grow(xs, lam_i, v, outward=True)
    if not bounds.xref.contains(R_i):
        raise InclusionLeavesDomain(f"inclusion box at s = {s} leaves the state reference box")
    R_e = _grow(xs, lam_e, v, outward=False).intersect(bounds.xref)
    return EnclosureAtS(s, xs, tuple(bs), tuple(ws), tuple(Ds), tuple(les), tuple(lis), R_i, R_e)
