"""Expression language for map branches.

Branches are written as small arithmetic expressions over the coordinates
``x0 .. x{k-1}``.  Every expression can be evaluated at a point (plain float
arithmetic) or over a box (outward-rounded interval arithmetic).  The grammar
is documented in ``docs/grammar.md``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

__all__ = [
    "ExprError", "LexError", "ParseError", "DomainError",
    "Token", "Interval", "Expr", "Num", "Var", "Neg", "BinOp", "Call",
    "tokenize", "parse", "parse_expr", "to_source", "bind", "variables",
    "eval_point", "eval_interval",
]

UNARY_FUNCS = ("sin", "cos", "exp", "abs", "sqrt")
BINARY_FUNCS = ("min", "max")
_TWO_PI = 2.0 * math.pi


class ExprError(ValueError):
    """Base class for lexing, parsing and evaluation errors."""


class LexError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class DomainError(ExprError):
    pass


# ---------------------------------------------------------------------------
# Lexer

class Token(NamedTuple):
    kind: str
    value: object = None
    offset: int = 0

    def __repr__(self):
        if self.value is None:
            return self.kind
        return f"{self.kind}({self.value!r})"

    def same(self, other: "Token") -> bool:
        return self.kind == other.kind and self.value == other.value


_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_VAR = re.compile(r"x(\d+)")
_PUNCT = {
    "+": "plus", "-": "minus", "*": "star", "/": "slash",
    "(": "lparen", ")": "rparen", ",": "comma",
}


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens (maximal munch).

    Offsets are byte offsets into the UTF-8 encoding of ``source``.
    """
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        ch = source[pos]
        if ch.isspace():
            pos += 1
            continue
        offset = len(source[:pos].encode("utf-8"))
        if ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], None, offset))
            pos += 1
            continue
        m = _NUMBER.match(source, pos)
        if m:
            tokens.append(Token("num", float(m.group()), offset))
            pos = m.end()
            continue
        m = _NAME.match(source, pos)
        if m:
            word = m.group()
            v = _VAR.fullmatch(word)
            if v:
                tokens.append(Token("var", int(v.group(1)), offset))
            else:
                tokens.append(Token("ident", word, offset))
            pos = m.end()
            continue
        raise LexError(f"unrecognized character {ch!r}", offset)
    return tokens


# ---------------------------------------------------------------------------
# AST

class Expr:
    """Base class of the immutable expression tree."""

    __slots__ = ()

    def __str__(self):
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: tuple


# ---------------------------------------------------------------------------
# Parser (Pratt style)

_INFIX_BP = {"plus": 10, "minus": 10, "star": 20, "slash": 20}
_INFIX_OP = {"plus": "+", "minus": "-", "star": "*", "slash": "/"}
_PREFIX_BP = 30  # unary minus binds tighter than * and /


class _Parser:
    def __init__(self, tokens: Sequence[Token], end_offset: int):
        self.tokens = list(tokens)
        self.pos = 0
        self.end_offset = end_offset

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def offset(self) -> int:
        tok = self.peek()
        return tok.offset if tok is not None else self.end_offset

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            raise ParseError(f"expected {what}", self.offset())
        return self.advance()

    def expression(self, rbp: int = 0) -> Expr:
        left = self.prefix()
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in _INFIX_BP:
                return left
            lbp = _INFIX_BP[tok.kind]
            if lbp <= rbp:
                return left
            self.advance()
            right = self.expression(lbp)
            left = BinOp(_INFIX_OP[tok.kind], left, right)

    def prefix(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise ParseError("expected expression", self.offset())
        if tok.kind == "num":
            self.advance()
            return Num(tok.value)
        if tok.kind == "var":
            self.advance()
            return Var(tok.value)
        if tok.kind == "minus":
            self.advance()
            return Neg(self.expression(_PREFIX_BP))
        if tok.kind == "plus":
            self.advance()
            return self.expression(_PREFIX_BP)
        if tok.kind == "lparen":
            self.advance()
            inner = self.expression()
            self.expect("rparen", "')'")
            return inner
        if tok.kind == "ident":
            return self.call()
        raise ParseError("expected expression", tok.offset)

    def call(self) -> Expr:
        tok = self.advance()
        name = tok.value
        if name in UNARY_FUNCS:
            arity = 1
        elif name in BINARY_FUNCS:
            arity = 2
        else:
            raise ParseError(f"unknown function {name!r}", tok.offset)
        self.expect("lparen", f"'(' after {name}")
        args = [self.expression()]
        for _ in range(arity - 1):
            self.expect("comma", "','")
            args.append(self.expression())
        self.expect("rparen", "')'")
        return Call(name, tuple(args))


def parse(tokens: Sequence[Token], end_offset: int | None = None) -> Expr:
    if end_offset is None:
        end_offset = tokens[-1].offset + 1 if tokens else 0
    p = _Parser(tokens, end_offset)
    expr = p.expression()
    if p.peek() is not None:
        raise ParseError("expected end of input", p.offset())
    return expr


def parse_expr(source: str, k: int | None = None) -> Expr:
    """Tokenize and parse ``source``; bind variables against ``k`` if given."""
    expr = parse(tokenize(source), len(source.encode("utf-8")))
    if k is not None:
        bind(expr, k)
    return expr


def variables(e: Expr) -> set[int]:
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Num):
        return set()
    if isinstance(e, Neg):
        return variables(e.arg)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    out = set()
    for a in e.args:
        out |= variables(a)
    return out


def bind(e: Expr, k: int) -> Expr:
    bad = sorted(i for i in variables(e) if i >= k)
    if bad:
        raise ExprError(f"variable x{bad[0]} out of range for dimension {k}")
    return e


def to_source(e: Expr) -> str:
    """Fully parenthesized source text; ``parse_expr(to_source(e)) == e``."""
    if isinstance(e, Num):
        return repr(float(e.value))
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Neg):
        return f"-({to_source(e.arg)})"
    if isinstance(e, BinOp):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    return f"{e.name}({', '.join(to_source(a) for a in e.args)})"


# ---------------------------------------------------------------------------
# Point evaluation

def eval_point(e: Expr, p: Sequence[float]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return float(p[e.index])
    if isinstance(e, Neg):
        return -eval_point(e.arg, p)
    if isinstance(e, BinOp):
        a = eval_point(e.left, p)
        b = eval_point(e.right, p)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0.0:
            raise DomainError("division by zero")
        return a / b
    name = e.name
    if name in BINARY_FUNCS:
        a = eval_point(e.args[0], p)
        b = eval_point(e.args[1], p)
        return min(a, b) if name == "min" else max(a, b)
    a = eval_point(e.args[0], p)
    if name == "sin":
        return math.sin(a)
    if name == "cos":
        return math.cos(a)
    if name == "exp":
        try:
            return math.exp(a)
        except OverflowError:
            return math.inf
    if name == "abs":
        return abs(a)
    if a < 0.0:
        raise DomainError(f"sqrt of negative argument {a!r}")
    return math.sqrt(a)


# ---------------------------------------------------------------------------
# Interval evaluation

def _down(x: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, -math.inf)
    return x


def _up(x: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, math.inf)
    return x


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __iter__(self):
        yield self.lo
        yield self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, o):
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    def __sub__(self, o):
        return Interval(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __mul__(self, o):
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        ps = [0.0 if math.isnan(v) else v for v in ps]  # 0 * inf
        return Interval(_down(min(ps)), _up(max(ps)))

    def __truediv__(self, o):
        if o.lo <= 0.0 <= o.hi:
            raise DomainError(f"divisor interval [{o.lo}, {o.hi}] contains 0")
        qs = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval(_down(min(qs)), _up(max(qs)))

    def sqr(self) -> "Interval":
        lo, hi = self.lo, self.hi
        if lo >= 0.0:
            return Interval(max(0.0, _down(lo * lo)), _up(hi * hi))
        if hi <= 0.0:
            return Interval(max(0.0, _down(hi * hi)), _up(lo * lo))
        return Interval(0.0, _up(max(lo * lo, hi * hi)))


def _contains_critical(lo: float, hi: float, phase: float) -> bool:
    """Is there an integer j with lo <= phase + 2*pi*j <= hi (conservatively)?"""
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    j = math.ceil((lo - slack - phase) / _TWO_PI)
    return phase + _TWO_PI * j <= hi + slack


def _trig(fn, x: Interval, max_phase: float, min_phase: float) -> Interval:
    if x.hi - x.lo >= _TWO_PI:
        return Interval(-1.0, 1.0)
    a, b = fn(x.lo), fn(x.hi)
    lo = max(-1.0, _down(min(a, b), 2))
    hi = min(1.0, _up(max(a, b), 2))
    if _contains_critical(x.lo, x.hi, max_phase):
        hi = 1.0
    if _contains_critical(x.lo, x.hi, min_phase):
        lo = -1.0
    return Interval(lo, hi)


def _exp(x: Interval) -> Interval:
    def e(v):
        try:
            return math.exp(v)
        except OverflowError:
            return math.inf
    return Interval(max(0.0, _down(e(x.lo), 2)), _up(e(x.hi), 2))


def _box_intervals(box) -> list[Interval]:
    out = []
    for b in box:
        if isinstance(b, Interval):
            out.append(b)
        else:
            lo, hi = b
            out.append(Interval(float(lo), float(hi)))
    return out


def eval_interval(e: Expr, box) -> Interval:
    """Outward-rounded enclosure of ``e`` over ``box``.

    ``box`` is a sequence of ``(lo, hi)`` pairs (or Intervals), one per axis.
    Raises DomainError when the interval extension is undefined somewhere on
    the box (sqrt of a possibly negative argument, divisor containing 0).
    """
    return _ieval(e, _box_intervals(box))


def _ieval(e: Expr, box: list[Interval]) -> Interval:
    if isinstance(e, Num):
        return Interval(e.value, e.value)
    if isinstance(e, Var):
        return box[e.index]
    if isinstance(e, Neg):
        return -_ieval(e.arg, box)
    if isinstance(e, BinOp):
        if e.op == "*" and e.left == e.right:
            return _ieval(e.left, box).sqr()
        a = _ieval(e.left, box)
        b = _ieval(e.right, box)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        return a / b
    name = e.name
    if name in BINARY_FUNCS:
        a = _ieval(e.args[0], box)
        b = _ieval(e.args[1], box)
        if name == "min":
            return Interval(min(a.lo, b.lo), min(a.hi, b.hi))
        return Interval(max(a.lo, b.lo), max(a.hi, b.hi))
    a = _ieval(e.args[0], box)
    if name == "sin":
        return _trig(math.sin, a, math.pi / 2, -math.pi / 2)
    if name == "cos":
        return _trig(math.cos, a, 0.0, math.pi)
    if name == "exp":
        return _exp(a)
    if name == "abs":
        if a.lo >= 0.0:
            return a
        if a.hi <= 0.0:
            return -a
        return Interval(0.0, max(-a.lo, a.hi))
    if a.lo < 0.0:
        raise DomainError(f"sqrt of interval [{a.lo}, {a.hi}] reaching below 0")
    return Interval(max(0.0, _down(math.sqrt(a.lo))), _up(math.sqrt(a.hi)))
