"""Small arithmetic expression language for data functions given as text.

Grammar, loosest binding first::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := number | name | func '(' expr ')' | '(' expr ')'

so ``^`` is right-associative and binds tighter than unary minus:
``-x^2`` is ``-(x^2)`` and ``2^-1`` is ``0.5``.  Names are the variables
``x, y, t, s`` and the constants ``pi`` and ``e``; functions are ``exp``,
``sin``, ``cos``, ``sqrt`` and ``abs``.  Evaluation accepts floats or numpy
arrays and raises :class:`EvalError` instead of producing NaN or infinity.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

VARIABLES = ("x", "y", "t", "s")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = ("exp", "sin", "cos", "sqrt", "abs")
MAX_DEPTH = 100
MAX_TREE_DEPTH = 250

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


class ExprSyntaxError(ConfigError):
    """Malformed expression; ``offset`` is a byte offset into the UTF-8 source."""

    def __init__(self, message: str, offset: int, expected: frozenset = frozenset(), source: str = ""):
        self.offset = offset
        self.expected = frozenset(expected)
        self.source = source
        want = f" (expected {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{want}")

    def caret(self) -> str:
        """The source line with a caret under the error position."""
        raw = self.source.encode("utf-8", "replace")
        col = len(raw[: self.offset].decode("utf-8", "replace"))
        return f"{self.source}\n{' ' * col}^"


class UnknownIdentifier(ExprSyntaxError):
    """A name that is neither a declared variable, a constant nor a function."""


class EvalError(ConfigError):
    """Evaluation hit a division by zero, a domain error or an overflow."""

    def __init__(self, node, cause: str):
        self.node = node
        self.cause = cause
        super().__init__(f"cannot evaluate {to_text(node)}: {cause}")


class UnboundVariable(EvalError):
    """A variable used by the expression has no binding."""


@dataclass(frozen=True)
class Const:
    value: float
    name: str | None = None


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    arg: Expr


@dataclass(frozen=True)
class Binary:
    op: str
    left: Expr
    right: Expr


Expr = Const | Var | Unary | Binary

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def variables(e: Expr) -> frozenset:
    """Names of the variables appearing in ``e``."""
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, Unary):
        return variables(e.arg)
    if isinstance(e, Binary):
        return variables(e.left) | variables(e.right)
    return frozenset()


def _depth(e: Expr) -> int:
    # iterative so that pathological inputs cannot exhaust the Python stack
    best, stack = 0, [(e, 1)]
    while stack:
        node, d = stack.pop()
        best = max(best, d)
        if isinstance(node, Unary):
            stack.append((node.arg, d + 1))
        elif isinstance(node, Binary):
            stack.extend(((node.left, d + 1), (node.right, d + 1)))
    return best


class _Parser:
    def __init__(self, src: str, allowed: tuple[str, ...]):
        self.src = src
        self.allowed = allowed
        self.pos = 0
        self.depth = 0

    def offset(self, pos: int | None = None) -> int:
        pos = self.pos if pos is None else pos
        return len(self.src[:pos].encode("utf-8"))

    def fail(self, message, expected=(), pos=None, cls=ExprSyntaxError):
        raise cls(message, self.offset(pos), frozenset(expected), self.src)

    def skip(self):
        while self.pos < len(self.src) and self.src[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.fail(self._found(), {repr(ch)})
        self.pos += 1

    def _found(self) -> str:
        return "unexpected end of input" if self.pos >= len(self.src) else f"unexpected {self.src[self.pos]!r}"

    def nest(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail(f"expression nested deeper than {MAX_DEPTH} levels")

    def parse(self) -> Expr:
        if not self.src.strip():
            self.fail("empty expression", {"number", "name", "'('", "'-'"})
        e = self.expr()
        if self.peek():
            self.fail(self._found(), {"operator", "end of input"})
        if _depth(e) > MAX_TREE_DEPTH:
            self.fail(f"expression tree deeper than {MAX_TREE_DEPTH} levels", pos=0)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek() in ("+", "-"):
            op = self.src[self.pos]
            self.pos += 1
            e = Binary(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek() in ("*", "/"):
            op = self.src[self.pos]
            self.pos += 1
            e = Binary(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        ch = self.peek()
        if ch in ("-", "+"):
            self.pos += 1
            self.nest()
            arg = self.unary()
            self.depth -= 1
            return Unary("neg", arg) if ch == "-" else arg
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            self.nest()
            exponent = self.unary()
            self.depth -= 1
            return Binary("^", base, exponent)
        return base

    def atom(self) -> Expr:
        ch = self.peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            self.nest()
            e = self.expr()
            self.depth -= 1
            self.expect(")")
            return e
        m = _NUMBER.match(self.src, self.pos)
        if m:
            self.pos = m.end()
            value = float(m.group())
            if not math.isfinite(value):
                self.fail("number out of range", pos=start)
            return Const(value)
        m = _NAME.match(self.src, self.pos)
        if m:
            name = m.group()
            self.pos = m.end()
            if name in FUNCTIONS:
                self.expect("(")
                self.nest()
                arg = self.expr()
                self.depth -= 1
                self.expect(")")
                return Unary(name, arg)
            if name in CONSTANTS:
                return Const(CONSTANTS[name], name)
            if name in self.allowed:
                return Var(name)
            known = sorted(set(self.allowed) | set(CONSTANTS) | set(FUNCTIONS))
            self.fail(f"unknown identifier {name!r}", known, pos=start, cls=UnknownIdentifier)
        self.fail(self._found(), {"number", "name", "'('", "'-'"})


def parse(src: str | bytes, allowed: tuple[str, ...] = VARIABLES) -> Expr:
    """Parse ``src`` into an immutable expression tree.

    ``allowed`` lists the variable names that may appear.  Bytes input must
    be UTF-8.
    """
    if isinstance(src, (bytes, bytearray)):
        try:
            src = bytes(src).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ExprSyntaxError("input is not valid UTF-8", exc.start) from None
    if not isinstance(src, str):
        raise ConfigError("expression source must be text")
    return _Parser(src, tuple(allowed)).parse()


def _check(node, value, what="result is not finite"):
    if not np.all(np.isfinite(value)):
        raise EvalError(node, what)
    return value


def evaluate(e: Expr, bindings: dict):
    """Value of ``e`` with variables taken from ``bindings`` (floats or arrays)."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        if e.name not in bindings:
            raise UnboundVariable(e, f"variable {e.name!r} is not bound")
        v = bindings[e.name]
        v = v if isinstance(v, float) else np.asarray(v, dtype=float)
        return _check(e, v, "variable value is not finite")
    if isinstance(e, Unary):
        a = evaluate(e.arg, bindings)
        with np.errstate(all="ignore"):
            if e.op == "neg":
                return -a
            if e.op == "abs":
                return np.abs(a)
            if e.op == "sqrt":
                if np.any(np.asarray(a) < 0):
                    raise EvalError(e, "square root of a negative number")
                return np.sqrt(a)
            fn = {"exp": np.exp, "sin": np.sin, "cos": np.cos}[e.op]
            return _check(e, fn(a), "overflow" if e.op == "exp" else "result is not finite")
    a = evaluate(e.left, bindings)
    b = evaluate(e.right, bindings)
    with np.errstate(all="ignore"):
        if e.op == "+":
            out = a + b
        elif e.op == "-":
            out = a - b
        elif e.op == "*":
            out = a * b
        elif e.op == "/":
            if np.any(np.asarray(b) == 0):
                raise EvalError(e, "division by zero")
            out = np.divide(a, b)
        else:
            base, ex = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
            if np.any((base < 0) & (ex != np.round(ex))):
                raise EvalError(e, "negative base with a non-integer exponent")
            if np.any((base == 0) & (ex < 0)):
                raise EvalError(e, "zero raised to a negative power")
            out = np.power(base, ex)
    out = _check(e, out, "overflow")
    return float(out) if np.ndim(out) == 0 else out


def to_text(e: Expr) -> str:
    """Canonical text with the fewest parentheses that preserve the tree."""
    return _text(e)[0]


def _wrap(child: Expr, need: int) -> str:
    txt, prec = _text(child)
    return f"({txt})" if prec < need else txt


def _text(e: Expr) -> tuple[str, int]:
    if isinstance(e, Const):
        if e.name:
            return e.name, _ATOM
        v = e.value
        return (str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)), _ATOM
    if isinstance(e, Var):
        return e.name, _ATOM
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + _wrap(e.arg, _PREC["neg"]), _PREC["neg"]
        return f"{e.op}({_text(e.arg)[0]})", _ATOM
    prec = _PREC[e.op]
    if e.op == "^":
        return f"{_wrap(e.left, _ATOM)}^{_wrap(e.right, _PREC['neg'])}", prec
    return f"{_wrap(e.left, prec)} {e.op} {_wrap(e.right, prec + 1)}", prec


def compile_expr(e: Expr, args: tuple[str, ...]):
    """Turn ``e`` into a function of positional arrays named by ``args``.

    Raises :class:`UnknownIdentifier` when ``e`` uses a variable outside ``args``.
    """
    extra = variables(e) - set(args)
    if extra:
        raise UnknownIdentifier(
            f"variable(s) {', '.join(sorted(extra))} not allowed here", 0, frozenset(args), to_text(e)
        )

    def fn(*vals):
        shape = np.broadcast(*vals).shape if vals else ()
        out = evaluate(e, dict(zip(args, vals)))
        return np.broadcast_to(np.asarray(out, dtype=float), shape)

    fn.expr = e
    return fn
