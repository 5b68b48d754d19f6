"""Outward-rounded interval arithmetic for scalars, boxes, matrices and 3-tensors.

All containers are immutable. Every arithmetic result encloses the exact
real result for all members of the operands; endpoints are computed with the
directed-rounding helpers in :mod:`paramex.rounding`.

Nonnegative bound quantities (``|C H(z,p)|`` and friends) are represented by
the interval absolute value ``[mig, mag]``; the rigorous upper bound is the
``hi`` endpoint and survives further interval arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable, Sequence

from . import rounding as rd
from .errors import DomainError, ShapeError

INF = math.inf


@dataclass(frozen=True, slots=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if type(self.lo) is not float or type(self.hi) is not float:
            object.__setattr__(self, "lo", float(self.lo))
            object.__setattr__(self, "hi", float(self.hi))
        if not self.lo <= self.hi and not (self.lo == INF and self.hi == -INF):
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    # construction -------------------------------------------------------

    @classmethod
    def point(cls, x) -> Interval:
        return coerce(x)

    @classmethod
    def empty(cls) -> Interval:
        return EMPTY

    @classmethod
    def from_fraction(cls, q: Fraction) -> Interval:
        return cls(*rd.fraction_bounds(q))

    @classmethod
    def entire(cls) -> Interval:
        return cls(-INF, INF)

    # predicates ---------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def is_thin(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        """Membership of a real number (float, int or Fraction) or subset test."""
        if isinstance(x, Interval):
            return x.is_empty or (self.lo <= x.lo and x.hi <= self.hi)
        if self.is_empty:
            return False
        # Fraction/float comparisons are exact
        return self.lo <= x <= self.hi

    def interior_contains(self, x) -> bool:
        if isinstance(x, Interval):
            return x.is_empty or (self.lo < x.lo and x.hi < self.hi)
        if self.is_empty:
            return False
        return self.lo < x < self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    # metrics ------------------------------------------------------------

    def mid(self) -> float:
        if self.is_empty:
            raise ValueError("midpoint of empty interval")
        if self.lo == -INF or self.hi == INF:
            if self.lo == -INF and self.hi == INF:
                return 0.0
            return self.lo if self.hi == INF else self.hi
        m = 0.5 * (self.lo + self.hi)
        if not math.isfinite(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        return m

    def rad(self) -> float:
        """Upper bound on the radius about :meth:`mid`."""
        m = self.mid()
        return max(rd.sub_up(m, self.lo), rd.sub_up(self.hi, m))

    def width(self) -> float:
        return rd.sub_up(self.hi, self.lo)

    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        if self.contains_zero():
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def __abs__(self) -> Interval:
        if self.is_empty:
            return EMPTY
        return Interval(self.mig(), self.mag())

    # set operations ------------------------------------------------------

    def hull(self, other) -> Interval:
        other = coerce(other)
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other) -> Interval:
        other = coerce(other)
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else EMPTY

    __or__ = hull
    __and__ = intersect

    # arithmetic ---------------------------------------------------------

    def __neg__(self) -> Interval:
        if self.is_empty:
            return EMPTY
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> Interval:
        return self

    def __add__(self, other) -> Interval:
        other = coerce(other)
        if self.is_empty or other.is_empty:
            return EMPTY
        return Interval(rd.add_down(self.lo, other.lo), rd.add_up(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other) -> Interval:
        other = coerce(other)
        if self.is_empty or other.is_empty:
            return EMPTY
        return Interval(rd.sub_down(self.lo, other.hi), rd.sub_up(self.hi, other.lo))

    def __rsub__(self, other) -> Interval:
        return coerce(other) - self

    def __mul__(self, other) -> Interval:
        other = coerce(other)
        if self.is_empty or other.is_empty:
            return EMPTY
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        if a == b and c == d:
            return Interval(rd.mul_down(a, c), rd.mul_up(a, c))
        pairs = ((a, c), (a, d), (b, c), (b, d))
        return Interval(min(rd.mul_down(x, y) for x, y in pairs), max(rd.mul_up(x, y) for x, y in pairs))

    __rmul__ = __mul__

    def __truediv__(self, other) -> Interval:
        other = coerce(other)
        if self.is_empty or other.is_empty:
            return EMPTY
        if other.contains_zero():
            raise DomainError(f"division by interval containing zero: {other}")
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        pairs = ((a, c), (a, d), (b, c), (b, d))
        return Interval(min(rd.div_down(x, y) for x, y in pairs), max(rd.div_up(x, y) for x, y in pairs))

    def __rtruediv__(self, other) -> Interval:
        return coerce(other) / self

    def __pow__(self, k: int) -> Interval:
        return pow_int(self, k)

    def sqrt(self) -> Interval:
        if self.is_empty:
            return EMPTY
        if self.lo < 0.0:
            raise DomainError(f"sqrt of interval with negative part: {self}")
        return Interval(rd.sqrt_down(self.lo), rd.sqrt_up(self.hi))

    # misc ---------------------------------------------------------------

    def to_json(self):
        if self.is_empty:
            return None
        return [_json_float(self.lo), _json_float(self.hi)]

    @classmethod
    def from_json(cls, data) -> Interval:
        if data is None:
            return EMPTY
        lo, hi = data
        return cls(_from_json_float(lo), _from_json_float(hi))

    def __repr__(self) -> str:
        if self.is_empty:
            return "Interval.empty()"
        return f"[{self.lo!r}, {self.hi!r}]"


EMPTY = Interval(INF, -INF)
ZERO = Interval(0.0, 0.0)
ONE = Interval(1.0, 1.0)


def _json_float(x: float):
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else "-inf"


def _from_json_float(x) -> float:
    return float(x)  # also parses "inf" / "-inf"


def coerce(x) -> Interval:
    """Smallest interval containing a number; intervals pass through."""
    if isinstance(x, Interval):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, float):
        if math.isnan(x):
            raise ValueError("NaN cannot be enclosed")
        return Interval(x, x)
    if isinstance(x, int):
        f = float(x)
        if int(f) == x:
            return Interval(f, f)
        return Interval.from_fraction(Fraction(x))
    if isinstance(x, Fraction):
        return Interval.from_fraction(x)
    if isinstance(x, Real):
        return coerce(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to Interval")


def pow_int(a: Interval, k: int) -> Interval:
    if not isinstance(k, int) or k < 0:
        raise DomainError(f"exponent must be a nonnegative integer, got {k!r}")
    if a.is_empty:
        return EMPTY
    if k == 0:
        return ONE
    if k == 1:
        return a
    lo, hi = a.lo, a.hi
    if k % 2:
        lo_b = rd.pow_down(lo, k) if lo >= 0 else -rd.pow_up(-lo, k)
        hi_b = rd.pow_up(hi, k) if hi >= 0 else -rd.pow_down(-hi, k)
        return Interval(lo_b, hi_b)
    if lo >= 0:
        return Interval(rd.pow_down(lo, k), rd.pow_up(hi, k))
    if hi <= 0:
        return Interval(rd.pow_down(-hi, k), rd.pow_up(-lo, k))
    return Interval(0.0, rd.pow_up(max(-lo, hi), k))


def isum(items: Iterable[Interval]) -> Interval:
    total = ZERO
    for it in items:
        total = total + it
    return total


def dot(a: Sequence, b: Sequence) -> Interval:
    if len(a) != len(b):
        raise ShapeError(f"dot of lengths {len(a)} and {len(b)}")
    return isum(coerce(x) * coerce(y) for x, y in zip(a, b))


def in_interior(x, outer) -> bool:
    """True when ``x`` (number, interval or box) lies in the interior of ``outer``."""
    return outer.interior_contains(x)


# --------------------------------------------------------------------------
# Boxes


class Box:
    """An interval vector."""

    __slots__ = ("_c",)

    def __init__(self, components: Iterable):
        object.__setattr__(self, "_c", tuple(coerce(c) for c in components))

    def __setattr__(self, name, value):
        raise AttributeError("Box is immutable")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> Box:
        return cls(Interval(float(lo), float(hi)) for lo, hi in pairs)

    @classmethod
    def point(cls, xs: Iterable) -> Box:
        return cls(coerce(x) for x in xs)

    @classmethod
    def zeros(cls, n: int) -> Box:
        return cls([ZERO] * n)

    @property
    def components(self) -> tuple[Interval, ...]:
        return self._c

    @property
    def dim(self) -> int:
        return len(self._c)

    def __len__(self) -> int:
        return len(self._c)

    def __iter__(self):
        return iter(self._c)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Box(self._c[i])
        return self._c[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Box) and self._c == other._c

    def __hash__(self) -> int:
        return hash(self._c)

    def __repr__(self) -> str:
        return f"Box({list(self._c)!r})"

    def _check(self, other) -> Box:
        other = other if isinstance(other, Box) else Box(other)
        if len(other) != len(self):
            raise ShapeError(f"box dimensions {len(self)} and {len(other)}")
        return other

    def __add__(self, other) -> Box:
        other = self._check(other)
        return Box(a + b for a, b in zip(self._c, other._c))

    def __sub__(self, other) -> Box:
        other = self._check(other)
        return Box(a - b for a, b in zip(self._c, other._c))

    def __neg__(self) -> Box:
        return Box(-a for a in self._c)

    def scale(self, factor) -> Box:
        f = coerce(factor)
        return Box(f * a for a in self._c)

    def hadamard(self, other) -> Box:
        other = self._check(other)
        return Box(a * b for a, b in zip(self._c, other._c))

    def concat(self, other) -> Box:
        return Box(self._c + tuple(other))

    def mid(self) -> tuple[float, ...]:
        return tuple(c.mid() for c in self._c)

    def rad(self) -> tuple[float, ...]:
        return tuple(c.rad() for c in self._c)

    def lo(self) -> tuple[float, ...]:
        return tuple(c.lo for c in self._c)

    def hi(self) -> tuple[float, ...]:
        return tuple(c.hi for c in self._c)

    def width(self) -> tuple[float, ...]:
        return tuple(c.width() for c in self._c)

    def max_width(self) -> float:
        return max((c.width() for c in self._c), default=0.0)

    def hull(self, other) -> Box:
        other = self._check(other)
        return Box(a.hull(b) for a, b in zip(self._c, other._c))

    def intersect(self, other) -> Box:
        other = self._check(other)
        return Box(a.intersect(b) for a, b in zip(self._c, other._c))

    @property
    def is_empty(self) -> bool:
        return any(c.is_empty for c in self._c)

    def contains(self, x) -> bool:
        """Componentwise containment of a point or a box."""
        x = list(x)
        if len(x) != len(self):
            raise ShapeError(f"box dimension {len(self)} vs {len(x)}")
        return all(c.contains(v) for c, v in zip(self._c, x))

    def interior_contains(self, x) -> bool:
        x = list(x)
        if len(x) != len(self):
            raise ShapeError(f"box dimension {len(self)} vs {len(x)}")
        return all(c.interior_contains(v) for c, v in zip(self._c, x))

    def absv(self) -> Box:
        """Interval absolute values; ``.hi()`` gives componentwise upper bounds."""
        return Box(abs(c) for c in self._c)

    def mag(self) -> tuple[float, ...]:
        return tuple(c.mag() for c in self._c)

    def to_json(self):
        return [c.to_json() for c in self._c]

    @classmethod
    def from_json(cls, data) -> Box:
        return cls(Interval.from_json(d) for d in data)


def absv(x):
    """Interval absolute value of an interval, box, matrix or tensor."""
    if isinstance(x, Interval):
        return abs(x)
    return x.absv()


def hull(a, b):
    return a.hull(b)


def intersect(a, b):
    return a.intersect(b)


def contains(outer, x) -> bool:
    return outer.contains(x)


def mag(x) -> float:
    if isinstance(x, Interval):
        return x.mag()
    return max(x.mag(), default=0.0)


# --------------------------------------------------------------------------
# Matrices


class IntervalMatrix:
    __slots__ = ("_e", "rows", "cols")

    def __init__(self, entries: Iterable[Iterable]):
        rows = tuple(tuple(coerce(v) for v in row) for row in entries)
        cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ShapeError("ragged matrix")
        object.__setattr__(self, "_e", rows)
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", cols)

    def __setattr__(self, name, value):
        raise AttributeError("IntervalMatrix is immutable")

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntervalMatrix:
        return cls([[ZERO] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> IntervalMatrix:
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def from_floats(cls, rows) -> IntervalMatrix:
        return cls([[float(v) for v in row] for row in rows])

    @classmethod
    def from_rows(cls, rows: Iterable[Box | Sequence]) -> IntervalMatrix:
        return cls([list(r) for r in rows])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> tuple[tuple[Interval, ...], ...]:
        return self._e

    def __getitem__(self, idx):
        if isinstance(idx, tuple):
            i, j = idx
            return self._e[i][j]
        return Box(self._e[idx])

    def row(self, i: int) -> Box:
        return Box(self._e[i])

    def col(self, j: int) -> Box:
        return Box(r[j] for r in self._e)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalMatrix) and self._e == other._e

    def __hash__(self) -> int:
        return hash(self._e)

    def __repr__(self) -> str:
        return f"IntervalMatrix({[list(r) for r in self._e]!r})"

    def select_cols(self, idx: Sequence[int]) -> IntervalMatrix:
        return IntervalMatrix([[r[j] for j in idx] for r in self._e])

    def select_rows(self, idx: Sequence[int]) -> IntervalMatrix:
        return IntervalMatrix([self._e[i] for i in idx])

    def transpose(self) -> IntervalMatrix:
        return IntervalMatrix(zip(*self._e)) if self.rows else IntervalMatrix([])

    def _same_shape(self, other: IntervalMatrix):
        if self.shape != other.shape:
            raise ShapeError(f"matrix shapes {self.shape} and {other.shape}")

    def __add__(self, other: IntervalMatrix) -> IntervalMatrix:
        self._same_shape(other)
        return IntervalMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._e, other._e)])

    def __sub__(self, other: IntervalMatrix) -> IntervalMatrix:
        self._same_shape(other)
        return IntervalMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._e, other._e)])

    def __neg__(self) -> IntervalMatrix:
        return IntervalMatrix([[-a for a in r] for r in self._e])

    def scale(self, factor) -> IntervalMatrix:
        f = coerce(factor)
        return IntervalMatrix([[f * a for a in r] for r in self._e])

    def __matmul__(self, other):
        if isinstance(other, IntervalMatrix):
            if self.cols != other.rows:
                raise ShapeError(f"matmul {self.shape} @ {other.shape}")
            cols = [other.col(j) for j in range(other.cols)]
            return IntervalMatrix([[dot(r, c) for c in cols] for r in self._e])
        if isinstance(other, IntervalTensor3):
            return mat_tensor(self, other)
        vec = other if isinstance(other, Box) else Box(other)
        if self.cols != len(vec):
            raise ShapeError(f"matvec {self.shape} @ {len(vec)}")
        return Box(dot(r, vec) for r in self._e)

    def absv(self) -> IntervalMatrix:
        return IntervalMatrix([[abs(a) for a in r] for r in self._e])

    def hi(self) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(a.hi for a in r) for r in self._e)

    def mid(self) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(a.mid() for a in r) for r in self._e)

    def mag(self) -> tuple[float, ...]:
        return tuple(a.mag() for r in self._e for a in r)

    def contains(self, other) -> bool:
        other = other if isinstance(other, IntervalMatrix) else IntervalMatrix(other)
        self._same_shape(other)
        return all(a.contains(b) for r, s in zip(self._e, other._e) for a, b in zip(r, s))

    def max_width(self) -> float:
        return max((a.width() for r in self._e for a in r), default=0.0)

    def to_json(self):
        return [[a.to_json() for a in r] for r in self._e]

    @classmethod
    def from_json(cls, data) -> IntervalMatrix:
        return cls([[Interval.from_json(a) for a in r] for r in data])


# --------------------------------------------------------------------------
# Order-3 tensors  T[i][j][k]


class IntervalTensor3:
    __slots__ = ("_e", "dims")

    def __init__(self, entries):
        cube = tuple(tuple(tuple(coerce(v) for v in fiber) for fiber in slab) for slab in entries)
        d1 = len(cube)
        d2 = len(cube[0]) if d1 else 0
        d3 = len(cube[0][0]) if d2 else 0
        if any(len(s) != d2 or any(len(f) != d3 for f in s) for s in cube):
            raise ShapeError("ragged tensor")
        object.__setattr__(self, "_e", cube)
        object.__setattr__(self, "dims", (d1, d2, d3))

    def __setattr__(self, name, value):
        raise AttributeError("IntervalTensor3 is immutable")

    @classmethod
    def zeros(cls, d1: int, d2: int, d3: int) -> IntervalTensor3:
        return cls([[[ZERO] * d3 for _ in range(d2)] for _ in range(d1)])

    @classmethod
    def from_slabs(cls, slabs: Sequence) -> IntervalTensor3:
        """Build from matrices ``slabs[k][i][j]`` (third index outermost)."""
        mats = [m.entries if isinstance(m, IntervalMatrix) else m for m in slabs]
        d3 = len(mats)
        d1 = len(mats[0])
        d2 = len(mats[0][0])
        return cls([[[mats[k][i][j] for k in range(d3)] for j in range(d2)] for i in range(d1)])

    @property
    def entries(self):
        return self._e

    def __getitem__(self, idx):
        i, j, k = idx
        return self._e[i][j][k]

    def slab(self, k: int) -> IntervalMatrix:
        """Matrix ``T[:, :, k]``."""
        return IntervalMatrix([[f[k] for f in s] for s in self._e])

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalTensor3) and self._e == other._e

    def __hash__(self) -> int:
        return hash(self._e)

    def __repr__(self) -> str:
        return f"IntervalTensor3(dims={self.dims})"

    def select(self, i=None, j=None, k=None) -> IntervalTensor3:
        d1, d2, d3 = self.dims
        ii = range(d1) if i is None else i
        jj = range(d2) if j is None else j
        kk = range(d3) if k is None else k
        return IntervalTensor3([[[self._e[a][b][c] for c in kk] for b in jj] for a in ii])

    def __add__(self, other: IntervalTensor3) -> IntervalTensor3:
        if self.dims != other.dims:
            raise ShapeError(f"tensor dims {self.dims} and {other.dims}")
        return IntervalTensor3(
            [[[a + b for a, b in zip(f, g)] for f, g in zip(s, t)] for s, t in zip(self._e, other._e)]
        )

    def absv(self) -> IntervalTensor3:
        return IntervalTensor3([[[abs(a) for a in f] for f in s] for s in self._e])

    def mag(self) -> tuple[float, ...]:
        return tuple(a.mag() for s in self._e for f in s for a in f)

    def max_width(self) -> float:
        return max((a.width() for s in self._e for f in s for a in f), default=0.0)

    def contains(self, other: IntervalTensor3) -> bool:
        if self.dims != other.dims:
            raise ShapeError(f"tensor dims {self.dims} and {other.dims}")
        return all(
            a.contains(b) for s, t in zip(self._e, other._e) for f, g in zip(s, t) for a, b in zip(f, g)
        )

    def to_json(self):
        return [[[a.to_json() for a in f] for f in s] for s in self._e]

    @classmethod
    def from_json(cls, data) -> IntervalTensor3:
        return cls([[[Interval.from_json(a) for a in f] for f in s] for s in data])


def tensor_vec(T: IntervalTensor3, v) -> IntervalMatrix:
    """(T v)_ij = sum_k T_ijk v_k."""
    v = v if isinstance(v, Box) else Box(v)
    d1, d2, d3 = T.dims
    if len(v) != d3:
        raise ShapeError(f"tensor_vec: tensor third dim {d3} vs vector {len(v)}")
    return IntervalMatrix([[dot(f, v) for f in s] for s in T.entries])


def mat_tensor(C: IntervalMatrix, T: IntervalTensor3) -> IntervalTensor3:
    """(C T)_ijk = sum_l C_il T_ljk."""
    d1, d2, d3 = T.dims
    if C.cols != d1:
        raise ShapeError(f"mat_tensor: matrix {C.shape} vs tensor {T.dims}")
    E = T.entries
    return IntervalTensor3(
        [[[dot(crow, [E[l][j][k] for l in range(d1)]) for k in range(d3)] for j in range(d2)] for crow in C.entries]
    )


def tensor_mat(T: IntervalTensor3, B: IntervalMatrix) -> IntervalTensor3:
    """(T B)_ijk = sum_l T_ijl B_lk."""
    d1, d2, d3 = T.dims
    if B.rows != d3:
        raise ShapeError(f"tensor_mat: tensor {T.dims} vs matrix {B.shape}")
    cols = [B.col(k) for k in range(B.cols)]
    return IntervalTensor3([[[dot(f, c) for c in cols] for f in s] for s in T.entries])


def quad_form(v, T: IntervalTensor3, w=None) -> Box:
    """(v^T T w)_i = sum_{j,k} v_j T_ijk w_k, computed as (T w) v."""
    w = v if w is None else w
    v = v if isinstance(v, Box) else Box(v)
    d1, d2, d3 = T.dims
    if len(v) != d2:
        raise ShapeError(f"quad_form: tensor {T.dims} vs vector {len(v)}")
    return tensor_vec(T, w) @ v


def outer(a: Sequence, b: Sequence) -> IntervalMatrix:
    return IntervalMatrix([[coerce(x) * coerce(y) for y in b] for x in a])


def magnitude(x):
    """Thin intervals holding the rounded-up magnitude of every entry.

    Products of such objects enclose a product of upper bounds tightly,
    which is how bound matrices like |C S| |T| are formed.
    """
    if isinstance(x, Interval):
        m = x.mag()
        return Interval(m, m)
    if isinstance(x, Box):
        return Box(magnitude(a) for a in x)
    if isinstance(x, IntervalMatrix):
        return IntervalMatrix([[magnitude(a) for a in r] for r in x.entries])
    if isinstance(x, IntervalTensor3):
        return IntervalTensor3([[[magnitude(a) for a in f] for f in s] for s in x.entries])
    raise TypeError(f"no magnitude for {type(x).__name__}")
