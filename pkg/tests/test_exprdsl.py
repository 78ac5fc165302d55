import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpf_chroma.exprdsl import (BinOp, Call, DomainError, ExprError, Interval, LexError, Neg, Num,
                                ParseError, Token, Var, eval_interval, eval_point, parse_expr,
                                to_source, tokenize)


def kinds(src):
    return [(t.kind, t.value) for t in tokenize(src)]


def test_tokenize_simple():
    assert kinds("x0 + 1") == [("var", 0), ("plus", None), ("num", 1.0)]


def test_tokenize_call():
    assert [t.kind for t in tokenize("min(x0, 2*x1)")] == [
        "ident", "lparen", "var", "comma", "num", "star", "var", "rparen"]
    toks = tokenize("min(x0, 2*x1)")
    assert toks[0].value == "min" and toks[2].value == 0 and toks[6].value == 1


def test_tokenize_offsets_and_errors():
    with pytest.raises(LexError) as exc:
        tokenize("x0 @ 1")
    assert exc.value.offset == 3
    # byte offsets count UTF-8 bytes
    with pytest.raises(LexError) as exc:
        tokenize("x0 + é")
    assert exc.value.offset == 5


def test_tokenize_exponent_literal():
    assert kinds("1.5e-3") == [("num", 1.5e-3)]


def test_precedence():
    assert parse_expr("1 + 2*x0") == BinOp("+", Num(1.0), BinOp("*", Num(2.0), Var(0)))
    assert parse_expr("-x0*x0") == BinOp("*", Neg(Var(0)), Var(0))
    assert parse_expr("1 - 2 - 3") == BinOp("-", BinOp("-", Num(1.0), Num(2.0)), Num(3.0))


def test_parse_errors():
    with pytest.raises(ParseError, match="expected expression"):
        parse_expr("min(1,")
    with pytest.raises(ParseError):
        parse_expr("x0 x1")
    with pytest.raises(ExprError):
        parse_expr("foo(x0)")
    with pytest.raises(ExprError):
        parse_expr("min(x0)")


def test_bind_dimension():
    parse_expr("x1", 2)
    with pytest.raises(ExprError):
        parse_expr("x2", 2)


def test_eval_point_examples():
    assert eval_point(parse_expr("x0+1"), (0,)) == 1
    assert eval_point(parse_expr("min(x0, 2)"), (5,)) == 2
    with pytest.raises(DomainError):
        eval_point(parse_expr("sqrt(x0)"), (-1,))
    with pytest.raises(DomainError):
        eval_point(parse_expr("1/x0"), (0,))


def test_eval_interval_examples():
    assert tuple(eval_interval(parse_expr("x0+1"), [(0, 1)])) == pytest.approx((1, 2))
    sq = eval_interval(parse_expr("x0*x0"), [(-1, 2)])
    assert sq.lo == 0.0 and sq.hi == pytest.approx(4) and sq.hi >= 4
    s = eval_interval(parse_expr("sin(x0)"), [(0, 3.2)])
    assert s.hi == 1.0 and s.lo <= math.sin(3.2)


def test_interval_division_by_zero_interval():
    with pytest.raises(DomainError):
        eval_interval(parse_expr("1/x0"), [(-1, 1)])


def test_grid_oracles():
    # brute-force min/max on a dense grid must be enclosed
    grid = np.linspace(-1, 2, 10_001)
    iv = eval_interval(parse_expr("x0*x0"), [(-1, 2)])
    vals = grid * grid
    assert iv.lo <= vals.min() and vals.max() <= iv.hi
    grid = np.linspace(0, 3.2, 10_001)
    iv = eval_interval(parse_expr("sin(x0)"), [(0, 3.2)])
    assert iv.lo <= np.sin(grid).min() and np.sin(grid).max() <= iv.hi


def test_outward_rounding():
    iv = Interval(0.1, 0.1) + Interval(0.2, 0.2)
    assert iv.lo < 0.1 + 0.2 < iv.hi


def test_roundtrip_source():
    for src in ["1 + 2*x0", "-x0*x0", "sin(x0) - cos(x1)/3", "max(abs(x0), exp(-x1))", "sqrt(x0*x0+1)"]:
        e = parse_expr(src)
        assert parse_expr(to_source(e)) == e


def test_ast_is_immutable():
    e = parse_expr("x0 + 1")
    with pytest.raises(Exception):
        e.op = "-"


# literals are non-negative: the parser reads "-3" as Neg(Num(3))
_leaf = st.one_of(st.integers(0, 1).map(Var), st.floats(0, 3).map(Num))


def _grow(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*"), children, children).map(lambda t: BinOp(*t)),
        children.map(Neg),
        st.tuples(st.sampled_from(["sin", "cos", "abs"]), children).map(lambda t: Call(t[0], (t[1],))),
        st.tuples(st.sampled_from(["min", "max"]), children, children).map(lambda t: Call(t[0], (t[1], t[2]))),
    )


exprs = st.recursive(_leaf, _grow, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(exprs, st.floats(-5, 5), st.floats(0, 2), st.floats(-5, 5), st.floats(0, 2),
       st.floats(0, 1), st.floats(0, 1))
def test_inclusion_property(e, a, wa, b, wb, ta, tb):
    box = [(a, a + wa), (b, b + wb)]
    p = (a + ta * wa, b + tb * wb)
    assert eval_point(e, p) in eval_interval(e, box)


@settings(max_examples=200, deadline=None)
@given(exprs, st.floats(-3, 3), st.floats(0, 2), st.floats(0, 1), st.floats(0, 1))
def test_monotone_property(e, a, w, s, t):
    lo, hi = sorted((a + s * w, a + t * w))
    outer = eval_interval(e, [(a, a + w), (0, 1)])
    inner = eval_interval(e, [(lo, hi), (0, 1)])
    assert outer.contains_interval(inner)


@settings(max_examples=200, deadline=None)
@given(exprs)
def test_to_source_roundtrip_property(e):
    assert parse_expr(to_source(e)) == e
