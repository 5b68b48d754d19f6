"""Directed rounding on binary64 without touching the FPU rounding mode.

Every helper performs the native round-to-nearest operation and then uses an
error-free transformation to decide whether the result already lies on the
requested side of the exact value. Only inexact results are nudged by one
ulp, so exact operations (the common case for small integers) stay exact.

When an error-free transformation is not valid (overflow, values close to
the underflow range) the result is nudged unconditionally.
"""

from __future__ import annotations

import math
from fractions import Fraction

INF = math.inf

_SPLITTER = 134217729.0  # 2**27 + 1
_TINY = 2.0**-900
_HUGE = 2.0**995


def next_down(x: float) -> float:
    return math.nextafter(x, -INF)


def next_up(x: float) -> float:
    return math.nextafter(x, INF)


def _two_sum_err(a: float, b: float, s: float) -> float:
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod_err(a: float, b: float, p: float) -> float:
    ah, al = _split(a)
    bh, bl = _split(b)
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _safe(*xs: float) -> bool:
    return all(_TINY <= abs(x) <= _HUGE for x in xs)


def add_down(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s):
        return next_down(s) if s == INF else s
    return s if _two_sum_err(a, b, s) >= 0 else next_down(s)


def add_up(a: float, b: float) -> float:
    s = a + b
    if not math.isfinite(s):
        return next_up(s) if s == -INF else s
    return s if _two_sum_err(a, b, s) <= 0 else next_up(s)


def sub_down(a: float, b: float) -> float:
    return add_down(a, -b)


def sub_up(a: float, b: float) -> float:
    return add_up(a, -b)


def _mul_sign(a: float, b: float) -> tuple[float, int | None]:
    """Product and the sign of (exact - rounded), None when undecidable."""
    if a == 0.0 or b == 0.0:
        return 0.0, 0
    p = a * b
    if math.isinf(a) or math.isinf(b):
        return p, 0
    if not math.isfinite(p) or not _safe(a, b, p):
        return p, None
    e = _two_prod_err(a, b, p)
    return p, (e > 0) - (e < 0)


def mul_down(a: float, b: float) -> float:
    p, sign = _mul_sign(a, b)
    if sign is None:
        return next_down(p)
    return p if sign >= 0 else next_down(p)


def mul_up(a: float, b: float) -> float:
    p, sign = _mul_sign(a, b)
    if sign is None:
        return next_up(p)
    return p if sign <= 0 else next_up(p)


def _div_sign(a: float, b: float) -> tuple[float, int | None]:
    if a == 0.0:
        return 0.0, 0
    if math.isinf(b):
        return (0.0 if not math.isinf(a) else math.nan), 0
    q = a / b
    if math.isinf(a):
        return q, 0
    if not math.isfinite(q) or not _safe(a, b, q):
        return q, None
    p = q * b
    e = _two_prod_err(q, b, p)
    r = (a - p) - e  # exact remainder a - q*b
    sign = (r > 0) - (r < 0)
    return q, sign if b > 0 else -sign


def div_down(a: float, b: float) -> float:
    q, sign = _div_sign(a, b)
    if sign is None:
        return next_down(q)
    return q if sign >= 0 else next_down(q)


def div_up(a: float, b: float) -> float:
    q, sign = _div_sign(a, b)
    if sign is None:
        return next_up(q)
    return q if sign <= 0 else next_up(q)


def sqrt_down(a: float) -> float:
    if a <= 0.0:
        return 0.0
    if math.isinf(a):
        return a
    r = math.sqrt(a)
    return r if Fraction(r) ** 2 <= Fraction(a) else next_down(r)


def sqrt_up(a: float) -> float:
    if a <= 0.0:
        return 0.0
    if math.isinf(a):
        return a
    r = math.sqrt(a)
    return r if Fraction(r) ** 2 >= Fraction(a) else next_up(r)


def pow_down(a: float, k: int) -> float:
    """Lower bound of a**k for a >= 0."""
    result, base = 1.0, a
    while k:
        if k & 1:
            result = mul_down(result, base)
        k >>= 1
        if k:
            base = mul_down(base, base)
    return result


def pow_up(a: float, k: int) -> float:
    """Upper bound of a**k for a >= 0."""
    result, base = 1.0, a
    while k:
        if k & 1:
            result = mul_up(result, base)
        k >>= 1
        if k:
            base = mul_up(base, base)
    return result


def fraction_bounds(q: Fraction) -> tuple[float, float]:
    """Tightest binary64 pair enclosing a rational number."""
    f = float(q)
    exact = Fraction(f)
    if exact == q:
        return f, f
    if exact < q:
        return f, next_up(f)
    return next_down(f), f
