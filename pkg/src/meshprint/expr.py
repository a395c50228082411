"""Scalar expressions f(x, y) for describing algebraic surfaces.

The grammar is ordinary infix notation::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" unary)?
    primary := NUMBER | "x" | "y" | "pi" | FUNC "(" expr ("," expr)* ")" | "(" expr ")"

So ``^`` is right-associative and binds tighter than unary minus on its left
(``-x^2 == -(x^2)``), while its right operand may itself be negated
(``2^-1 == 0.5``).  ``max`` and ``min`` take exactly two arguments, every other
function exactly one.

Bracketed computer-algebra notation translates by renaming: ``Sqrt[...]``
becomes ``sqrt(...)`` and ``Max[a, b]`` becomes ``max(a, b)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import ArityError, DomainError, ExpressionSyntaxError, UnknownIdentifier

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Call", "Expression",
    "parse_expression", "evaluate", "to_source", "is_flagged",
]

VARIABLES = ("x", "y")
CONSTANTS = {"pi": math.pi}
ARITY = {"sqrt": 1, "exp": 1, "sin": 1, "cos": 1, "abs": 1, "max": 2, "min": 2}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


Expression = Union[Num, Var, Neg, BinOp, Call]


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), _byte_offset(source, pos)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source, index):
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source):
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, offset = self.peek()
        if value != text or kind != "op":
            found = "end of input" if kind == "end" else repr(value)
            raise ExpressionSyntaxError(f"expected {text!r}, found {found}", offset)
        return self.take()

    def parse(self):
        node = self.expr()
        kind, value, offset = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {value!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        kind, value, offset = self.take()
        if kind == "num":
            number = float(value)
            if not math.isfinite(number):
                raise ExpressionSyntaxError(f"numeric literal {value!r} out of range", offset)
            return Num(number)
        if kind == "name":
            if value in ARITY:
                return self.call(value, offset)
            if value in VARIABLES:
                return Var(value)
            if value in CONSTANTS:
                return Var(value)
            raise UnknownIdentifier(value, offset)
        if (kind, value) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(value)
        raise ExpressionSyntaxError(f"expected a number, name or '(', found {found}", offset)

    def call(self, func, offset):
        self.expect("(")
        args = [self.expr()]
        while self.peek()[:2] == ("op", ","):
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != ARITY[func]:
            raise ArityError(func, ARITY[func], len(args), offset)
        return Call(func, tuple(args))


def parse_expression(source: str) -> Expression:
    """Parse ``source`` into an immutable expression tree."""
    if not source or not source.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return _Parser(source).parse()


def _pow(a, b):
    try:
        return math.pow(a, b)
    except (ZeroDivisionError, ValueError):
        return math.nan
    except OverflowError:
        odd = b.is_integer() and b % 2 == 1
        return -math.inf if a < 0 and odd else math.inf


def _div(a, b):
    if b == 0.0:
        return math.nan
    return a / b


def _sqrt(a):
    return math.sqrt(a) if a >= 0.0 else math.nan


def _exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        return math.inf


def _trig(fn):
    def wrapped(a):
        if math.isinf(a):
            return math.nan
        return fn(a)
    return wrapped


_FUNCS = {
    "sqrt": _sqrt,
    "exp": _exp,
    "sin": _trig(math.sin),
    "cos": _trig(math.cos),
    "abs": abs,
    "max": max,
    "min": min,
}

_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "^": _pow,
}


def _eval(node, x, y):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name == "x":
            return x
        if node.name == "y":
            return y
        return CONSTANTS[node.name]
    if isinstance(node, BinOp):
        return _BINOPS[node.op](_eval(node.left, x, y), _eval(node.right, x, y))
    if isinstance(node, Neg):
        return -_eval(node.operand, x, y)
    if isinstance(node, Call):
        args = [_eval(a, x, y) for a in node.args]
        if node.func in ("max", "min") and any(math.isnan(a) for a in args):
            return math.nan
        return _FUNCS[node.func](*args)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(e: Expression, x: float, y: float, strict: bool = False) -> float:
    """Evaluate ``e`` at ``(x, y)`` with IEEE double semantics.

    Square roots of negatives and divisions by zero give NaN instead of
    raising; use :func:`is_flagged` to test the result.  With ``strict=True``
    any non-finite result raises :class:`DomainError` instead.
    """
    value = float(_eval(e, float(x), float(y)))
    if strict and not math.isfinite(value):
        raise DomainError(x, y, value)
    return value


def is_flagged(value: float) -> bool:
    """True when an evaluation result is unusable (NaN or infinite)."""
    return not math.isfinite(value)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_source(e: Expression) -> str:
    """Render ``e`` as text that parses back to the same tree."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"-{_wrap(e.operand)}"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(to_source(a) for a in e.args)})"
    if isinstance(e, BinOp):
        if e.op == "^":
            return f"{_wrap(e.left)}^{_wrap(e.right)}"
        left = to_source(e.left)
        if isinstance(e.left, BinOp) and e.left.op != "^" and _PREC[e.left.op] < _PREC[e.op]:
            left = f"({left})"
        right = to_source(e.right)
        if isinstance(e.right, BinOp) and e.right.op != "^" and _PREC[e.right.op] <= _PREC[e.op]:
            right = f"({right})"
        if isinstance(e.right, Neg):
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e):
    # atoms and calls need no parentheses as operands of ^ or unary minus
    if isinstance(e, (Var, Call, Num)):
        return to_source(e)
    return f"({to_source(e)})"
