"""Arithmetic expressions over x1..xn.

Grammar (precedence low to high; ``^`` is right-associative and binds tighter
than unary minus, so ``-2^2 == -4`` and ``2^-1 == 0.5``)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?
    atom   := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

Names are the variables ``x1``, ``x2``, ..., the constant ``pi`` and the
unary functions ``sin``, ``cos``, ``exp``, ``sqrt``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .geometry import (Box, Interval, cos_interval, exp_interval, sin_interval,
                       sqrt_interval)


class ExpressionError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


FUNCTIONS = {
    "sin": (np.sin, sin_interval),
    "cos": (np.cos, cos_interval),
    "exp": (np.exp, exp_interval),
    "sqrt": (np.sqrt, sqrt_interval),
}
CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Num, Var, Const, Neg, BinOp, Call]

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, n_vars: int | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n_vars = n_vars

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ExpressionError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                if self.peek()[1] != "(":
                    raise ExpressionError(f"function {val!r} expects one argument in parentheses", self.peek()[2])
                self.take()
                arg = self.expr()
                if self.peek()[1] == ",":
                    raise ExpressionError(f"function {val!r} takes exactly one argument", self.peek()[2])
                self.expect(")")
                return Call(val, arg)
            if val in CONSTANTS:
                return Const(val)
            m = re.fullmatch(r"x([1-9]\d*)", val)
            if m:
                index = int(m.group(1))
                if self.n_vars is not None and index > self.n_vars:
                    raise ExpressionError(f"variable {val} exceeds dimension {self.n_vars}", pos)
                return Var(index)
            raise ExpressionError(f"unknown identifier {val!r}", pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ExpressionError("unexpected end of input", pos)
        raise ExpressionError(f"unexpected {val!r}", pos)


def parse(text: str, n_vars: int | None = None) -> Node:
    """Parse ``text`` into an expression tree; errors carry a character offset."""
    return _Parser(text, n_vars).parse()


def evaluate(node: Node, x) -> np.ndarray | float:
    """Evaluate at a point (1-d) or at rows of a 2-d array of points."""
    x = np.asarray(x, dtype=float)
    out = _eval(node, np.atleast_2d(x))
    out = np.broadcast_to(out, (np.atleast_2d(x).shape[0],)).astype(float)
    return float(out[0]) if x.ndim <= 1 else out


def _eval(node: Node, X: np.ndarray):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.index > X.shape[1]:
            raise IndexError(f"x{node.index} used with {X.shape[1]}-dimensional input")
        return X[:, node.index - 1]
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, X)
    if isinstance(node, Call):
        return FUNCTIONS[node.name][0](_eval(node.arg, X))
    a, b = _eval(node.left, X), _eval(node.right, X)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return np.divide(a, b)
        return np.power(np.asarray(a, dtype=float), b)


def enclose(node: Node, box: Box) -> Interval:
    """Natural interval extension of ``node`` over ``box``."""
    if isinstance(node, Num):
        return Interval.point(node.value)
    if isinstance(node, Var):
        return box[node.index]
    if isinstance(node, Const):
        return Interval.point(CONSTANTS[node.name])
    if isinstance(node, Neg):
        return -enclose(node.operand, box)
    if isinstance(node, Call):
        return FUNCTIONS[node.name][1](enclose(node.arg, box))
    a, b = enclose(node.left, box), enclose(node.right, box)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a ** b


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return 5


def to_text(node: Node) -> str:
    """Render with the fewest parentheses that parse back to the same tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        # -(a*b) must stay grouped; ^ binds tighter so -a^b needs nothing
        return f"-{inner}" if _prec(node.operand) >= _PREC["neg"] else f"-({inner})"
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        # the base must be an atom; the exponent is parsed as a unary
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < _PREC["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    # left-associative: an equal-precedence right operand needs grouping
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


def max_var(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, (Neg,)):
        return max_var(node.operand)
    if isinstance(node, Call):
        return max_var(node.arg)
    if isinstance(node, BinOp):
        return max(max_var(node.left), max_var(node.right))
    return 0
