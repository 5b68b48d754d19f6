"""Expression DAGs for systems H(x, s) = 0.

Supported: rational operations, nonnegative integer powers, decimal or
integer literals and ``sqrt(c)`` for a nonnegative rational constant ``c``.
Variables are ``x1..xn`` and ``s1..sp`` (``s`` is accepted when p = 1) and
are addressed by their position in the combined vector y = (x, s).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

from .errors import DomainError, ParseError, ProblemError
from .interval import Box, Interval, IntervalMatrix, coerce
from . import rounding as rd


class Expr:
    """Base class of expression nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def children(self) -> tuple[Expr, ...]:
        return ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction
    text: str | None = field(default=None, compare=False)

    @cached_property
    def enclosure(self) -> Interval:
        return Interval.from_fraction(self.value)


@dataclass(frozen=True)
class SqrtConst(Expr):
    radicand: Fraction

    @cached_property
    def enclosure(self) -> Interval:
        return sqrt_enclosure(self.radicand)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    pos: int


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class _Binary(Expr):
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


class Add(_Binary):
    pass


class Sub(_Binary):
    pass


class Mul(_Binary):
    pass


class Div(_Binary):
    pass


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exp: int

    def __post_init__(self):
        if not isinstance(self.exp, int) or self.exp < 0:
            raise ValueError("exponent must be a nonnegative integer literal")

    def children(self):
        return (self.base,)


def sqrt_enclosure(q: Fraction) -> Interval:
    """Enclosure of sqrt(q) at most one ulp wide."""
    if q < 0:
        raise DomainError(f"sqrt of negative constant {q}")
    r = math.sqrt(float(q))
    lo = r if Fraction(r) ** 2 <= q else rd.next_down(r)
    while Fraction(lo) ** 2 > q:
        lo = rd.next_down(lo)
    hi = lo if Fraction(lo) ** 2 == q else rd.next_up(lo)
    while Fraction(hi) ** 2 < q:
        hi = rd.next_up(hi)
    return Interval(lo, hi)


# --------------------------------------------------------------------------
# smart constructors used by differentiation

ZERO_C = Const(Fraction(0))
ONE_C = Const(Fraction(1))


def _is_const(e: Expr, v=None) -> bool:
    return isinstance(e, Const) and (v is None or e.value == v)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0):
        return b
    if _is_const(b, 0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0):
        return a
    if _is_const(a, 0):
        return neg(b)
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    return Sub(a, b)


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return Const(-a.value) if a.value == 0 else Neg(a)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0) or _is_const(b, 0):
        return ZERO_C
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0):
        return ZERO_C
    if _is_const(b, 1):
        return a
    return Div(a, b)


def power(a: Expr, k: int) -> Expr:
    if k == 0:
        return ONE_C
    if k == 1:
        return a
    return Pow(a, k)


def diff(e: Expr, pos: int) -> Expr:
    """Symbolic partial derivative with respect to combined coordinate ``pos``."""
    memo: dict[int, Expr] = {}

    def d(node: Expr) -> Expr:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, (Const, SqrtConst)):
            r = ZERO_C
        elif isinstance(node, Var):
            r = ONE_C if node.pos == pos else ZERO_C
        elif isinstance(node, Neg):
            r = neg(d(node.arg))
        elif isinstance(node, Add):
            r = add(d(node.left), d(node.right))
        elif isinstance(node, Sub):
            r = sub(d(node.left), d(node.right))
        elif isinstance(node, Mul):
            r = add(mul(d(node.left), node.right), mul(node.left, d(node.right)))
        elif isinstance(node, Div):
            u, v = node.left, node.right
            r = div(sub(mul(d(u), v), mul(u, d(v))), Pow(v, 2))
        elif isinstance(node, Pow):
            k = node.exp
            db = d(node.base)
            r = ZERO_C if k == 0 else mul(mul(Const(Fraction(k)), power(node.base, k - 1)), db)
        else:
            raise TypeError(f"unknown node {node!r}")
        memo[key] = r
        return r

    return d(e)


def variables(e: Expr) -> set[int]:
    seen, out, stack = set(), set(), [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if isinstance(node, Var):
            out.add(node.pos)
        stack.extend(node.children())
    return out


# --------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr, y: Sequence, const: Callable[[Expr], object], pow_fn=None):
    """Evaluate ``e`` at ``y`` with the arithmetic of whatever number type ``y`` holds.

    ``const`` maps constant nodes to that number type. Shared subexpressions
    are evaluated once.
    """
    memo: dict[int, object] = {}
    pow_fn = pow_fn or (lambda a, k: a**k)

    def ev(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, (Const, SqrtConst)):
            r = const(node)
        elif isinstance(node, Var):
            r = y[node.pos]
        elif isinstance(node, Neg):
            r = -ev(node.arg)
        elif isinstance(node, Add):
            r = ev(node.left) + ev(node.right)
        elif isinstance(node, Sub):
            r = ev(node.left) - ev(node.right)
        elif isinstance(node, Mul):
            r = ev(node.left) * ev(node.right)
        elif isinstance(node, Div):
            den = ev(node.right)
            if not isinstance(den, Interval) and den == 0:
                raise DomainError("division by zero")
            r = ev(node.left) / den
        elif isinstance(node, Pow):
            r = pow_fn(ev(node.base), node.exp)
        else:
            raise TypeError(f"unknown node {node!r}")
        memo[key] = r
        return r

    return ev(e)


def _interval_const(node) -> Interval:
    return node.enclosure


def _float_const(node) -> float:
    if isinstance(node, Const):
        return float(node.value)
    return math.sqrt(float(node.radicand))


def _exact_const(node) -> Fraction:
    if isinstance(node, Const):
        return node.value
    raise DomainError("sqrt constant has no exact rational value")


def eval_interval(e: Expr, y: Sequence) -> Interval:
    return evaluate(e, [coerce(v) for v in y], _interval_const)


def eval_float(e: Expr, y: Sequence[float]) -> float:
    return evaluate(e, [float(v) for v in y], _float_const, pow_fn=lambda a, k: a**k if k else 1.0)


def eval_exact(e: Expr, y: Sequence) -> Fraction:
    return evaluate(e, [Fraction(v) for v in y], _exact_const)


def eval_point(e: Expr, x: Sequence[float], s: Sequence[float] = ()) -> Interval:
    """Tight enclosure of the exact value at the point (x, s)."""
    return eval_interval(e, list(x) + list(s))


def eval_box(e: Expr, x, s=()) -> Interval:
    """Natural interval extension over the box x * s."""
    return eval_interval(e, list(x) + list(s))


# --------------------------------------------------------------------------
# text form


def to_text(e: Expr) -> str:
    """Serialise so that parsing the result reproduces an identical DAG."""

    def atom(node) -> str:
        t = to_text(node)
        if isinstance(node, (Var, SqrtConst)) or (isinstance(node, Const) and node.value >= 0 and _const_text(node).replace(".", "").isdigit()):
            return t
        return f"({t})"

    if isinstance(e, Const):
        if e.value < 0:
            return f"-{_const_text(Const(-e.value))}"
        return _const_text(e)
    if isinstance(e, SqrtConst):
        return f"sqrt({e.radicand})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"-{atom(e.arg)}"
    if isinstance(e, Pow):
        return f"{atom(e.base)}^{e.exp}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    return f"{atom(e.left)} {op} {atom(e.right)}"


def _const_text(c: Const) -> str:
    if c.text is not None:
        return c.text
    if c.value.denominator == 1:
        return str(c.value.numerator)
    # terminating decimals keep a literal form; anything else becomes a quotient
    den = c.value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        digits = max(twos, fives)
        scaled = c.value * 10**digits
        s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
        return f"{s[:-digits]}.{s[-digits:]}"
    return f"({c.value.numerator}/{c.value.denominator})"


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^();])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _tokenize(text: str) -> list[_Tok]:
    toks, i = [], 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            line, col = _position(text, i)
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), i))
        i = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, n: int, p: int):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.n, self.p = n, p

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.toks[self.i]
        line, col = _position(self.text, tok.offset)
        raise ParseError(msg, line, col)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def take(self, text: str | None = None) -> _Tok:
        t = self.tok
        if text is not None and t.text != text:
            self.error(f"expected {text!r}, found {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def equations(self) -> list[Expr]:
        eqs = [self.expr()]
        while self.tok.text == ";":
            self.take()
            if self.tok.kind == "eof":
                break
            eqs.append(self.expr())
        if self.tok.kind != "eof":
            self.error(f"unexpected token {self.tok.text!r}")
        return eqs

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self.take().text
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self) -> Expr:
        if self.tok.text == "-":
            self.take()
            return Neg(self.unary())
        if self.tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.text == "^":
            self.take()
            t = self.tok
            if t.kind != "num" or not t.text.isdigit():
                self.error("exponent must be a nonnegative integer literal")
            self.take()
            return Pow(base, int(t.text))
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.take()
            return Const(Fraction(t.text), t.text)
        if t.text == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if t.kind == "name":
            self.take()
            if t.text == "sqrt":
                self.take("(")
                inner_tok = self.tok
                inner = self.expr()
                self.take(")")
                if variables(inner):
                    self.error("sqrt() accepts constant arguments only", inner_tok)
                try:
                    q = eval_exact(inner, [])
                except (DomainError, ZeroDivisionError):
                    self.error("sqrt() argument must be a rational constant", inner_tok)
                if q < 0:
                    self.error("sqrt() of a negative constant", inner_tok)
                return SqrtConst(q)
            return self.variable(t)
        self.error(f"unexpected token {t.text or 'end of input'!r}")

    def variable(self, t: _Tok) -> Var:
        m = re.fullmatch(r"([xs])(\d+)", t.text)
        if t.text == "s" and self.p == 1:
            return Var("s1", self.n)
        if not m:
            self.error(f"unknown variable {t.text!r}", t)
        cls, idx = m.group(1), int(m.group(2))
        limit = self.n if cls == "x" else self.p
        if not 1 <= idx <= limit:
            self.error(f"unknown variable {t.text!r} (declared n={self.n}, p={self.p})", t)
        pos = idx - 1 if cls == "x" else self.n + idx - 1
        return Var(t.text, pos)


def parse_expr(text: str, n: int, p: int) -> Expr:
    eqs = _Parser(text, n, p).equations()
    if len(eqs) != 1:
        raise ParseError(f"expected a single expression, found {len(eqs)}")
    return eqs[0]


def parse_constant(text) -> float:
    """Float value of a number or a constant expression such as ``"sqrt(13)"``."""
    if isinstance(text, (int, float)):
        return float(text)
    return eval_float(parse_expr(str(text), 0, 0), [])


def parse_constant_interval(text) -> Interval:
    """Outward enclosure of a number or constant expression."""
    if isinstance(text, Interval):
        return text
    if isinstance(text, (int, float)):
        return coerce(float(text))
    return eval_interval(parse_expr(str(text), 0, 0), [])


# --------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class System:
    """H: X x S -> R^n with equations over the combined vector y = (x, s)."""

    n: int
    p: int
    equations: tuple[Expr, ...]
    X: Box
    S: Box

    def __post_init__(self):
        if len(self.equations) != self.n:
            raise ProblemError(f"{len(self.equations)} equations for n={self.n}")
        if len(self.X) != self.n or len(self.S) != self.p:
            raise ProblemError("domain boxes do not match (n, p)")
        if self.X.is_empty or self.S.is_empty:
            raise ProblemError("empty domain box")
        for e in self.equations:
            if any(v >= self.n + self.p for v in variables(e)):
                raise ProblemError("variable index out of range")

    @property
    def m(self) -> int:
        return self.n + self.p

    @cached_property
    def derivatives(self) -> tuple[tuple[Expr, ...], ...]:
        """Symbolic partials dH_i/dy_k for all combined coordinates k."""
        return tuple(tuple(diff(e, k) for k in range(self.m)) for e in self.equations)

    def eval_point(self, x, s=()) -> Box:
        y = list(x) + list(s)
        return Box(eval_interval(e, y) for e in self.equations)

    def eval_box(self, x, s=()) -> Box:
        y = list(x) + list(s)
        return Box(eval_interval(e, y) for e in self.equations)

    def eval_float(self, x, s=()) -> list[float]:
        y = list(x) + list(s)
        return [eval_float(e, y) for e in self.equations]

    def jacobian(self, y) -> IntervalMatrix:
        """Full Jacobian (n x (n+p)) enclosed over the point or box ``y``."""
        y = [coerce(v) for v in y]
        return IntervalMatrix([[eval_interval(d, y) for d in row] for row in self.derivatives])

    def jacobian_float(self, y) -> list[list[float]]:
        y = [float(v) for v in y]
        return [[eval_float(d, y) for d in row] for row in self.derivatives]

    def to_text(self) -> str:
        return " ; ".join(to_text(e) for e in self.equations)


def parse_system(text: str, n: int, p: int, X=None, S=None) -> System:
    """Parse ``;``-separated equations. Domains default to the whole real line."""
    eqs = _Parser(text, n, p).equations()
    if len(eqs) != n:
        raise ParseError(f"found {len(eqs)} equations but n={n}")
    X = _box(X, n, "X")
    S = _box(S, p, "S")
    return System(n, p, tuple(eqs), X, S)


def _box(data, dim: int, label: str) -> Box:
    if data is None:
        return Box([Interval.entire()] * dim)
    if isinstance(data, Box):
        box = data
    else:
        try:
            box = Box(Interval(parse_constant(lo), parse_constant(hi)) for lo, hi in data)
        except (TypeError, ValueError) as exc:
            raise ProblemError(f"{label}: expected a list of [lo, hi] pairs ({exc})") from None
    if len(box) != dim:
        raise ProblemError(f"{label} has dimension {len(box)}, expected {dim}")
    return box


# --------------------------------------------------------------------------
# problem files


@dataclass(frozen=True)
class Problem:
    system: System
    center_p: tuple[float, ...]
    guess_z: tuple[float, ...] | None = None
    approx: dict = field(default_factory=lambda: {"kind": "tangent"})
    v: tuple[float, ...] | None = None
    y: tuple[float, ...] | None = None
    xref: Box | None = None
    sref: Box | None = None
    sweep_range: Box | None = None
    source: dict = field(default_factory=dict, compare=False)


def problem_from_dict(data: dict) -> Problem:
    try:
        n, p = int(data["n"]), int(data["p"])
        equations = data["equations"]
        center_p = tuple(parse_constant(c) for c in data["center_p"])
    except KeyError as exc:
        raise ProblemError(f"missing key {exc.args[0]!r}") from None
    if isinstance(equations, str):
        equations = [equations]
    text = " ;\n".join(equations)
    system = parse_system(text, n, p, data.get("X"), data.get("S"))
    if len(center_p) != p:
        raise ProblemError(f"center_p has {len(center_p)} entries, expected {p}")

    def vec(key, dim):
        if data.get(key) is None:
            return None
        out = tuple(parse_constant(c) for c in data[key])
        if len(out) != dim:
            raise ProblemError(f"{key} has {len(out)} entries, expected {dim}")
        return out

    approx = dict(data.get("approx") or {"kind": "tangent"})
    if approx.get("kind") not in ("tangent", "secant", "linear"):
        raise ProblemError(f"unknown approximation kind {approx.get('kind')!r}")
    return Problem(
        system=system,
        center_p=center_p,
        guess_z=vec("guess_z", n),
        approx=approx,
        v=vec("v", n),
        y=vec("y", p),
        xref=_box(data["xref"], n, "xref") if data.get("xref") is not None else None,
        sref=_box(data["sref"], p, "sref") if data.get("sref") is not None else None,
        sweep_range=_box(data["sweep_range"], p, "sweep_range") if data.get("sweep_range") is not None else None,
        source=data,
    )


def load_problem(path) -> Problem:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ProblemError(f"{path}: top level must be an object")
    return problem_from_dict(data)
