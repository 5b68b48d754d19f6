"""Inclusion and exclusion regions around an approximate zero at a fixed parameter.

Bounds such as |C H(z, p)| are stored as thin intervals holding a rounded-up
magnitude. Upper bounds enter every formula through ``.hi`` and the
quantities that must be underestimated (w, D) through ``.lo``, so each
derived radius errs on the safe side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from . import rounding as rd
from .errors import (
    InclusionLeavesDomain,
    LambdaOrderViolation,
    NonpositiveDiscriminant,
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
)
from .slope import slope_second
from .verify import newton_refine, point_inverse

INF = math.inf


@dataclass(frozen=True)
class FixedBounds:
    b_bar: Box  # |C H(z, p)|
    B0: IntervalMatrix  # |C H'_x(z, p) - I|
    B_bar: IntervalTensor3  # |C S[(z,p),(z,p),(x,p)] H_xx| over xbox
    xbox: Box


@dataclass(frozen=True)
class LambdaPair:
    w: tuple[Interval, ...]
    a: tuple[Interval, ...]
    b: tuple[float, ...]
    D: tuple[Interval, ...]
    lambda_e_j: tuple[float, ...]
    lambda_i_j: tuple[float, ...]

    @property
    def lambda_e(self) -> float:
        return min(self.lambda_e_j)

    @property
    def lambda_i(self) -> float:
        return max(self.lambda_i_j)


@dataclass(frozen=True)
class FixedCertificate:
    z: tuple[float, ...]
    p: tuple[float, ...]
    C: IntervalMatrix
    v: tuple[float, ...]
    bounds: FixedBounds
    lambdas: LambdaPair
    R_i: Box
    R_e: Box

    @property
    def xbox(self) -> Box:
        return self.bounds.xbox

    @property
    def w(self):
        return self.lambdas.w

    @property
    def a(self):
        return self.lambdas.a

    @property
    def D(self):
        return self.lambdas.D

    @property
    def lambda_e(self) -> float:
        return self.lambdas.lambda_e

    @property
    def lambda_i(self) -> float:
        return self.lambdas.lambda_i


def upper(x) -> tuple[float, ...]:
    """Upper endpoints of a box or of a flat sequence of intervals."""
    return tuple(coerce(a).hi for a in x)


def upper_matrix(M: IntervalMatrix) -> IntervalMatrix:
    return IntervalMatrix([[a.hi for a in r] for r in M.entries])


def upper_tensor(T: IntervalTensor3) -> IntervalTensor3:
    return IntervalTensor3([[[a.hi for a in f] for f in s] for s in T.entries])


def fixed_bounds(sys: System, z: Sequence[float], p: Sequence[float], C: IntervalMatrix, xbox: Box) -> FixedBounds:
    # z outside xbox is allowed here; fixed_regions then rejects R_i
    n = sys.n
    zp = list(z) + list(p)
    b_bar = magnitude(C @ sys.eval_point(z, p))
    J = sys.jacobian(zp).select_cols(range(n))
    B0 = magnitude(C @ J - IntervalMatrix.identity(n))
    T = slope_second(sys, zp, zp, list(xbox) + list(p))
    Txx = T.select(j=range(n), k=range(n))
    B_bar = magnitude(mat_tensor(C, Txx))
    return FixedBounds(b_bar, B0, B_bar, xbox)


def lambda_roots(w_lo: float, a_hi: float, b_hi: float, j: int) -> tuple[Interval, float, float]:
    """Conservative roots of a lambda^2 - w lambda + b = 0.

    Returns (D, lambda_e, lambda_i) with lambda_e rounded down and lambda_i
    rounded up. The small root uses 2b / (w + sqrt(D)), which equals
    b / (a lambda_e) and stays accurate (and finite) when a or b vanish.
    """
    if not w_lo > 0.0:
        raise NonpositiveDiscriminant(j, f"w_{j + 1} = {w_lo!r} is not positive", details={"component": j})
    W = Interval(w_lo, w_lo)
    D = W * W - Interval(4.0, 4.0) * Interval(a_hi, a_hi) * Interval(b_hi, b_hi)
    if not D.lo > 0.0:
        raise NonpositiveDiscriminant(j, details={"component": j, "D": D.lo})
    root = rd.sqrt_down(D.lo)
    den = rd.add_down(w_lo, root)
    lam_e = INF if a_hi == 0.0 else rd.div_down(den, rd.mul_up(2.0, a_hi))
    lam_i = rd.div_up(rd.mul_up(2.0, b_hi), den)
    return D, lam_e, lam_i


def lambda_pair(bounds: FixedBounds, v: Sequence[float]) -> LambdaPair:
    n = len(bounds.b_bar)
    if len(v) != n:
        raise ShapeError(f"scaling vector has {len(v)} entries, expected {n}")
    if not all(x > 0 for x in v):
        raise ValueError("scaling vector v must be positive")
    vb = Box.point(v)
    w = vb - upper_matrix(bounds.B0) @ vb
    a = quad_form(vb, upper_tensor(bounds.B_bar))
    b = upper(bounds.b_bar)
    D, le, li = [], [], []
    for j in range(n):
        Dj, e, i = lambda_roots(w[j].lo, a[j].hi, b[j], j)
        D.append(Dj)
        le.append(e)
        li.append(i)
    return LambdaPair(tuple(w), tuple(a), b, tuple(D), tuple(le), tuple(li))


def box_around(center: Sequence[float], lam: float, v: Sequence[float], *, outward: bool) -> Box:
    """[c - lam v, c + lam v], rounded outward or inward."""
    comps = []
    for c, vj in zip(center, v):
        if outward:
            r = rd.mul_up(lam, vj)
            comps.append(Interval(rd.sub_down(c, r), rd.add_up(c, r)))
        else:
            r = rd.mul_down(lam, vj) if math.isfinite(lam) else INF
            lo, hi = rd.sub_up(c, r), rd.add_down(c, r)
            comps.append(Interval(lo, hi) if lo <= hi else Interval(c, c))
    return Box(comps)


def fixed_regions(
    sys: System,
    z: Sequence[float],
    p: Sequence[float],
    C: IntervalMatrix,
    xbox: Box,
    v: Sequence[float] | None = None,
    bounds: FixedBounds | None = None,
) -> FixedCertificate:
    z, p = tuple(float(t) for t in z), tuple(float(t) for t in p)
    v = tuple(float(t) for t in (v or [1.0] * sys.n))
    bounds = bounds or fixed_bounds(sys, z, p, C, xbox)
    lam = lambda_pair(bounds, v)
    if not lam.lambda_e > lam.lambda_i:
        raise LambdaOrderViolation(
            f"lambda_e = {lam.lambda_e!r} does not exceed lambda_i = {lam.lambda_i!r}",
            details={"lambda_e": lam.lambda_e, "lambda_i": lam.lambda_i},
        )
    R_i = box_around(z, lam.lambda_i, v, outward=True)
    if not xbox.contains(R_i):
        raise InclusionLeavesDomain("inclusion region is not contained in the reference box", details={"R_i": R_i.to_json()})
    R_e = box_around(z, lam.lambda_e, v, outward=False).intersect(xbox)
    return FixedCertificate(z, p, C, v, bounds, lam, R_i, R_e)


def certify_fixed(
    sys: System,
    p: Sequence[float],
    guess: Sequence[float],
    *,
    v: Sequence[float] | None = None,
    xbox: Box | None = None,
    newton_tol: float = 1e-12,
) -> FixedCertificate:
    """Newton-refine ``guess`` at ``p``, then build the fixed-parameter certificate."""
    z = newton_refine(sys, p, guess, tol=newton_tol).z
    C = IntervalMatrix.from_floats(point_inverse(sys, z, p).tolist())
    return fixed_regions(sys, z, p, C, xbox or sys.X, v)
