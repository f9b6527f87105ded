from __future__ import annotations

import math
import re

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fractel import ConfigError
from fractel.exprparse import (
    MAX_DEPTH,
    Binary,
    Const,
    EvalError,
    ExprSyntaxError,
    Unary,
    UnboundVariable,
    UnknownIdentifier,
    Var,
    compile_expr,
    evaluate,
    parse,
    to_text,
    variables,
)

# examples


@pytest.mark.parametrize(
    "src, bindings, expected",
    [
        ("2+3*4", {}, 14.0),
        ("exp(-x^2)", {"x": 0.0}, 1.0),
        ("x^2+exp(-y)", {"x": 2.0, "y": 0.0}, 5.0),
        ("-x^2", {"x": 2.0}, -4.0),
        ("2^3^2", {}, 512.0),
        ("2^-1", {}, 0.5),
        ("(2+3)*4", {}, 20.0),
        ("8/4/2", {}, 1.0),
        ("7-2-1", {}, 4.0),
        ("-2*-3", {}, 6.0),
        ("  sqrt( 16 )\t+ abs(-1) ", {}, 5.0),
        ("cos(pi) + e^0", {}, 0.0),
        ("1.5e1 + .5", {}, 15.5),
        ("x*y - t/s", {"x": 2.0, "y": 3.0, "t": 1.0, "s": 4.0}, 5.75),
    ],
)
def test_examples(src, bindings, expected):
    assert evaluate(parse(src), bindings) == expected


def test_unclosed_call_reports_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("sin(")
    assert info.value.offset == 4
    assert "number" in info.value.expected
    assert info.value.caret() == "sin(\n    ^"


@pytest.mark.parametrize(
    "src, offset",
    [("", 0), ("2+", 2), ("x y", 2), ("(x", 2), ("x)", 1), ("1..2", 2), ("x^", 2), ("x**2", 2), ("é+x", 0)],
)
def test_syntax_error_offsets(src, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(src)
    assert info.value.offset == offset


def test_offsets_count_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse("x + é")
    assert info.value.offset == 4
    with pytest.raises(ExprSyntaxError) as info:
        parse(b"x + \xff")
    assert info.value.offset == 4


@pytest.mark.parametrize("src", ["foo(1)", "z + 1", "sinh(x)"])
def test_unknown_identifiers(src):
    with pytest.raises(UnknownIdentifier) as info:
        parse(src)
    assert "x" in info.value.expected


def test_restricted_variable_set():
    assert variables(parse("x + y")) == {"x", "y"}
    with pytest.raises(UnknownIdentifier):
        parse("x + y", allowed=("x",))
    with pytest.raises(UnknownIdentifier):
        compile_expr(parse("x + t"), ("x",))


@pytest.mark.parametrize(
    "src, bindings",
    [
        ("1/ (x-1)", {"x": 1.0}),
        ("sqrt(x)", {"x": -1.0}),
        ("x^0.5", {"x": -4.0}),
        ("0^-1", {}),
        ("exp(x)", {"x": 1000.0}),
        ("x*x", {"x": 1e200}),
    ],
)
def test_evaluation_errors(src, bindings):
    with pytest.raises(EvalError):
        evaluate(parse(src), bindings)


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(parse("x + y"), {"x": 1.0})
    with pytest.raises(EvalError):
        evaluate(parse("x"), {"x": math.nan})


def test_array_evaluation_matches_scalar():
    e = parse("exp(-x^2) * cos(y)")
    x = np.linspace(-2.0, 2.0, 7)
    got = evaluate(e, {"x": x, "y": 0.3})
    assert np.array_equal(got, [evaluate(e, {"x": float(v), "y": 0.3}) for v in x])
    with pytest.raises(EvalError):
        evaluate(parse("1/x"), {"x": np.array([1.0, 0.0])})


def test_compiled_function_broadcasts():
    fn = compile_expr(parse("1 + 0*x"), ("x", "y"))
    out = fn(np.zeros(3), np.zeros((2, 1)))
    assert out.shape == (2, 3) and np.all(out == 1.0)
    assert compile_expr(parse("2"), ("x",))(np.zeros(4)).shape == (4,)


def test_deep_nesting_is_rejected_cleanly():
    ok = "(" * (MAX_DEPTH - 5) + "x" + ")" * (MAX_DEPTH - 5)
    assert evaluate(parse(ok), {"x": 2.0}) == 2.0
    for src in (
        "(" * 100000 + "x" + ")" * 100000,
        "-" * 100000 + "x",
        "x^" * 100000 + "x",
        "exp(" * 5000 + "x" + ")" * 5000,
        "1" + "+1" * 100000,
    ):
        with pytest.raises(ExprSyntaxError):
            parse(src)


def test_parsing_is_pure():
    e = parse("x^2 + sin(y)")
    assert parse("x^2 + sin(y)") == e
    b = {"x": 0.7, "y": 1.1}
    assert evaluate(e, b) == evaluate(e, b)
    assert b == {"x": 0.7, "y": 1.1}


# generated trees

_leaf = st.one_of(
    st.integers(0, 20).map(lambda v: Const(float(v))),
    st.sampled_from([0.5, 0.25, 1.5, 1e-3, 2.5e6]).map(Const),
    st.sampled_from([Const(math.pi, "pi"), Const(math.e, "e")]),
    st.sampled_from(["x", "y", "t", "s"]).map(Var),
)


def _extend(children):
    return st.one_of(
        st.builds(Unary, st.sampled_from(["neg", "exp", "sin", "cos", "sqrt", "abs"]), children),
        st.builds(Binary, st.sampled_from(["+", "-", "*", "/", "^"]), children, children),
    )


trees = st.recursive(_leaf, _extend, max_leaves=12)
points = st.fixed_dictionaries({v: st.floats(-3.0, 3.0) for v in "xyts"})


@given(trees)
def test_printing_round_trip(e):
    text = to_text(e)
    assert parse(text) == e
    assert to_text(parse(text)) == text


class _Bad(Exception):
    pass


class _Num:
    """Checked float used by the reference evaluator; any non-finite step is an error."""

    def __init__(self, v):
        self.v = np.float64(v)
        if not np.isfinite(self.v):
            raise _Bad

    def __neg__(self):
        return _Num(-self.v)

    def __add__(self, o):
        return _Num(self.v + o.v)

    def __sub__(self, o):
        return _Num(self.v - o.v)

    def __mul__(self, o):
        return _Num(self.v * o.v)

    def __truediv__(self, o):
        if o.v == 0:
            raise _Bad
        return _Num(self.v / o.v)

    def __pow__(self, o):
        if (self.v < 0 and o.v != round(o.v)) or (self.v == 0 and o.v < 0):
            raise _Bad
        return _Num(np.power(self.v, o.v))


def _sqrt(a):
    if a.v < 0:
        raise _Bad
    return _Num(np.sqrt(a.v))


_REF_NAMES = {
    "exp": lambda a: _Num(np.exp(a.v)),
    "sin": lambda a: _Num(np.sin(a.v)),
    "cos": lambda a: _Num(np.cos(a.v)),
    "abs": lambda a: _Num(abs(a.v)),
    "sqrt": _sqrt,
    "pi": _Num(math.pi),
    "e": _Num(math.e),
}
_LITERAL = re.compile(r"(?<![A-Za-z_])(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


def _reference(text, bindings):
    # Python's own grammar gives ** the same binding as ^ here
    py = _LITERAL.sub(lambda m: f"_Num({m.group(0)!r})", text).replace("^", "**")
    scope = dict(_REF_NAMES, _Num=_Num, **{k: _Num(v) for k, v in bindings.items()})
    with np.errstate(all="ignore"):
        return eval(py, {"__builtins__": {}}, scope).v


@given(trees, points)
def test_evaluation_matches_reference(e, bindings):
    text = to_text(e)
    try:
        ref = _reference(text, bindings)
    except _Bad:
        ref = None
    try:
        got = evaluate(parse(text), bindings)
    except EvalError:
        got = None
    if ref is None or got is None:
        assert ref is None and got is None, text
    else:
        assert got == pytest.approx(float(ref), rel=1e-12, abs=1e-300), text


_ALPHABET = "0123456789.eE+-*/^() \txystpicosqrtabexpn,;_"


@given(st.text(_ALPHABET, max_size=40))
def test_grammar_like_text_never_crashes(src):
    _parse_and_eval(src)


@given(st.binary(max_size=60))
def test_random_bytes_never_crash(raw):
    _parse_and_eval(raw)


@given(st.text(max_size=40))
def test_random_unicode_never_crashes(src):
    _parse_and_eval(src)


def _parse_and_eval(src):
    size = len(src) if isinstance(src, bytes) else len(src.encode("utf-8"))
    try:
        e = parse(src)
    except ExprSyntaxError as exc:
        assert 0 <= exc.offset <= size
        exc.caret()
        return
    try:
        v = evaluate(e, {"x": 0.3, "y": -1.2, "t": 2.0, "s": 0.0})
    except EvalError:
        return
    assert math.isfinite(v)


def test_non_text_source_is_rejected():
    with pytest.raises(ConfigError):
        parse(12)
