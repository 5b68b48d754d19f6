"""Slope arithmetic over expression DAGs.

All routines work in the combined coordinates y = (x, s) of a system. A
center may be a point or a box; with a box center every identity holds for
each point of it, which is what the parametric bounds need.

First-order rules (u, v children, z center, x the evaluation box):

    u * v :  S_u v(x) + u(z) S_v
    u / v :  (S_u - q(z) S_v) / v(x),  q = u / v
    u ^ k :  S_{u^(k-1)} u(x) + u(z)^(k-1) S_u

Second-order tensors T satisfy S[z,x] = S[z,z'] + T (x - z') and follow
from the first-order rules by telescoping:

    u * v :  T_u v(x) + S_u[z,z'] (x) S_v[z',x] + u(z) T_v
    u / v :  (T_u - q(z) T_v - S_q[z,z'] (x) S_v[z',x]) / v(x)

where (x) denotes the outer product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ShapeError
from .expr import Add, Const, Div, Expr, Mul, Neg, Pow, SqrtConst, Sub, System, Var
from .interval import (
    ONE,
    ZERO,
    Box,
    Interval,
    IntervalMatrix,
    IntervalTensor3,
    coerce,
    pow_int,
)


@dataclass(frozen=True)
class SlopeEval:
    """F(z), a slope matrix S[z, box]F and optionally a second-order tensor."""

    center_value: Box
    slope: IntervalMatrix
    box_value: Box
    second: IntervalTensor3 | None = None


@dataclass(frozen=True)
class GSlope:
    """Slope of g(s) = (x_hat(s), s): ``full`` stacks ``theta`` over the identity."""

    theta: IntervalMatrix

    @property
    def full(self) -> IntervalMatrix:
        n, p = self.theta.shape
        eye = IntervalMatrix.identity(p)
        return IntervalMatrix(list(self.theta.entries) + list(eye.entries))


@dataclass(frozen=True)
class _Rec:
    center: Interval
    box: Interval
    slope: tuple[Interval, ...]


def _vec(y) -> list[Interval]:
    """Points, intervals or [lo, hi] pairs to a list of intervals."""
    return [Interval(*v) if isinstance(v, (tuple, list)) else coerce(v) for v in y]


def _first_pass(roots: Sequence[Expr], zc: list[Interval], xb: list[Interval]) -> dict[int, _Rec]:
    m = len(zc)
    zero_row = (ZERO,) * m
    memo: dict[int, _Rec] = {}

    def go(node: Expr) -> _Rec:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, (Const, SqrtConst)):
            c = node.enclosure
            r = _Rec(c, c, zero_row)
        elif isinstance(node, Var):
            row = tuple(ONE if k == node.pos else ZERO for k in range(m))
            r = _Rec(zc[node.pos], xb[node.pos], row)
        elif isinstance(node, Neg):
            a = go(node.arg)
            r = _Rec(-a.center, -a.box, tuple(-s for s in a.slope))
        elif isinstance(node, (Add, Sub)):
            a, b = go(node.left), go(node.right)
            if isinstance(node, Add):
                r = _Rec(a.center + b.center, a.box + b.box, tuple(s + t for s, t in zip(a.slope, b.slope)))
            else:
                r = _Rec(a.center - b.center, a.box - b.box, tuple(s - t for s, t in zip(a.slope, b.slope)))
        elif isinstance(node, Mul):
            a, b = go(node.left), go(node.right)
            row = tuple(s * b.box + a.center * t for s, t in zip(a.slope, b.slope))
            r = _Rec(a.center * b.center, a.box * b.box, row)
        elif isinstance(node, Div):
            a, b = go(node.left), go(node.right)
            q = a.center / b.center
            row = tuple((s - q * t) / b.box for s, t in zip(a.slope, b.slope))
            r = _Rec(q, a.box / b.box, row)
        elif isinstance(node, Pow):
            r = _pow_first(go(node.base), node.exp, m)
        else:
            raise TypeError(f"unknown node {node!r}")
        memo[key] = r
        return r

    for root in roots:
        go(root)
    return memo


def _pow_first(u: _Rec, k: int, m: int) -> _Rec:
    if k == 0:
        return _Rec(ONE, ONE, (ZERO,) * m)
    row = u.slope
    for j in range(2, k + 1):
        f = pow_int(u.center, j - 1)
        row = tuple(s * u.box + f * t for s, t in zip(row, u.slope))
    return _Rec(pow_int(u.center, k), pow_int(u.box, k), row)


def _roots(e) -> list[Expr]:
    if isinstance(e, System):
        return list(e.equations)
    if isinstance(e, Expr):
        return [e]
    return list(e)


def _check_dims(roots, *vecs):
    m = len(vecs[0])
    if any(len(v) != m for v in vecs):
        raise ShapeError("center and box dimensions differ")
    return m


def slope_first(e, z, xbox) -> SlopeEval:
    """First-order slope S[z, xbox] of a system, expression or expression list."""
    roots = _roots(e)
    zc, xb = _vec(z), _vec(xbox)
    _check_dims(roots, zc, xb)
    memo = _first_pass(roots, zc, xb)
    recs = [memo[id(r)] for r in roots]
    return SlopeEval(
        center_value=Box(r.center for r in recs),
        slope=IntervalMatrix([r.slope for r in recs]),
        box_value=Box(r.box for r in recs),
    )


def _outer(a, b):
    return [[s * t for t in b] for s in a]


def _mat_add(*ms):
    out = ms[0]
    for m in ms[1:]:
        out = [[s + t for s, t in zip(r, q)] for r, q in zip(out, m)]
    return out


def _mat_scale(M, f: Interval):
    return [[a * f for a in r] for r in M]


def _mat_div(M, f: Interval):
    return [[a / f for a in r] for r in M]


def _second_pass(roots, zc, z2, xb):
    """Second-order tensors T[j][k] (m x m nested lists), one per root."""
    m = len(zc)
    A = _first_pass(roots, zc, z2)  # slopes S[z, z'] and values at z
    B = _first_pass(roots, z2, xb)  # slopes S[z', x] and values over x
    zero_m = [[ZERO] * m for _ in range(m)]
    memo: dict[int, list] = {}

    def go(node: Expr):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, (Const, SqrtConst, Var)):
            T = zero_m
        elif isinstance(node, Neg):
            T = [[-a for a in r] for r in go(node.arg)]
        elif isinstance(node, Add):
            T = _mat_add(go(node.left), go(node.right))
        elif isinstance(node, Sub):
            T = _mat_add(go(node.left), [[-a for a in r] for r in go(node.right)])
        elif isinstance(node, Mul):
            u, v = node.left, node.right
            T = _mat_add(
                _mat_scale(go(u), B[id(v)].box),
                _outer(A[id(u)].slope, B[id(v)].slope),
                _mat_scale(go(v), A[id(u)].center),
            )
        elif isinstance(node, Div):
            u, v = node.left, node.right
            q = A[id(node)]
            num = _mat_add(
                go(u),
                _mat_scale(go(v), -q.center),
                [[-a for a in r] for r in _outer(q.slope, B[id(v)].slope)],
            )
            T = _mat_div(num, B[id(v)].box)
        elif isinstance(node, Pow):
            T = _pow_second(A[id(node.base)], B[id(node.base)], go(node.base), node.exp, m)
        else:
            raise TypeError(f"unknown node {node!r}")
        memo[key] = T
        return T

    return [go(r) for r in roots]


def _pow_second(ua: _Rec, ub: _Rec, Tu, k: int, m: int):
    if k == 0:
        return [[ZERO] * m for _ in range(m)]
    # running S[z,z'] slope and tensor of u^j, built as u^(j-1) * u
    row_a, T = ua.slope, Tu
    for j in range(2, k + 1):
        f = pow_int(ua.center, j - 1)
        T = _mat_add(_mat_scale(T, ub.box), _outer(row_a, ub.slope), _mat_scale(Tu, f))
        row_a = tuple(s * ua.box + f * t for s, t in zip(row_a, ua.slope))
    return T


def slope_second(e, z, z2, xbox) -> IntervalTensor3:
    """Tensor T with S[z, xbox] contained in S[z, z2] + T (xbox - z2).

    Index layout T[i][j][k]: equation i, slope column j, direction k.
    """
    roots = _roots(e)
    zc, zc2, xb = _vec(z), _vec(z2), _vec(xbox)
    _check_dims(roots, zc, zc2, xb)
    return IntervalTensor3(_second_pass(roots, zc, zc2, xb))


def slope_full(e, z, xbox, z2=None) -> SlopeEval:
    """First-order slope together with the second-order tensor (z' = z by default)."""
    first = slope_first(e, z, xbox)
    second = slope_second(e, z, z if z2 is None else z2, xbox)
    return SlopeEval(first.center_value, first.slope, first.box_value, second)


# --------------------------------------------------------------------------
# derivative-based objects


def jacobian(sys: System, y) -> IntervalMatrix:
    """H'_x enclosed at the point or box y = (x, s)."""
    return sys.jacobian(y).select_cols(range(sys.n))


def jacobian_slope(sys: System, gp, gsbox) -> IntervalTensor3:
    """Slope of H'_x: H'_x(y) in H'_x(gp) + S (y - gp) for y in gsbox.

    Layout S[i][j][k]: equation i, state column j of H'_x, direction k of y.
    """
    exprs = [sys.derivatives[i][j] for i in range(sys.n) for j in range(sys.n)]
    ev = slope_first(exprs, gp, gsbox)
    rows = ev.slope.entries
    n = sys.n
    return IntervalTensor3([[rows[i * n + j] for j in range(n)] for i in range(n)])


def gslope(approx, p=None, sbox=None) -> GSlope:
    """Slope of g(s) = (x_hat(s), s) for an affine approximation function.

    An affine x_hat has slope Theta for every center and box, so ``p`` and
    ``sbox`` only matter for dimension checks.
    """
    theta = approx.theta
    if sbox is not None and len(sbox) != theta.cols:
        raise ShapeError(f"parameter box of dimension {len(sbox)} for Theta {theta.shape}")
    return GSlope(theta)


def chain_slope(outer: SlopeEval | IntervalMatrix, g: GSlope) -> IntervalMatrix:
    """Slope of H o g from a slope of H at g(p) over g(sbox) and the slope of g."""
    S = outer.slope if isinstance(outer, SlopeEval) else outer
    full = g.full
    if S.cols != full.rows:
        raise ShapeError(f"chain rule: outer slope {S.shape} vs g slope {full.shape}")
    return S @ full
