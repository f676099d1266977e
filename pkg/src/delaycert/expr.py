"""Arithmetic expressions for user-defined vector fields.

Grammar (``^`` is right-associative and binds tighter than unary minus,
so ``-x1^2`` means ``-(x1^2)``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | VAR | '(' expr ')'
    VAR    := 'x' INDEX | 'z' INDEX        (1-based component index)

``x<k>`` is the current value of component k. ``z<k>`` is component k of
the delayed sample used by the equation the expression belongs to.
:func:`to_text` prints an expression that parses back to the same tree.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Union


class ExprError(ValueError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # 'x' or 'z'
    index: int  # 1-based


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Num, Var, Neg, Bin]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<var>[xz]\d+)|(?P<op>[-+*/^()]))"
)


def tokenize(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprError(f"unexpected character {text[pos:pos + 1]!r} at {pos} in {text!r}")
        pos = m.end()
        out.append((m.lastgroup, m.group(m.lastgroup)))
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else None

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, sym):
        if self.peek() != sym:
            raise ExprError(f"expected {sym!r} in {self.text!r}")
        self.take()

    def parse(self):
        if not self.toks:
            raise ExprError("empty expression")
        node = self.expr()
        if self.i != len(self.toks):
            raise ExprError(f"trailing input {self.peek()!r} in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[1]
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()[1]
            node = Bin(op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            operand = self.unary()
            if isinstance(operand, Num):
                return Num(-operand.value)
            return Neg(operand)
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            return Bin("^", base, self.unary())
        return base

    def atom(self):
        if self.i >= len(self.toks):
            raise ExprError(f"unexpected end of {self.text!r}")
        kind, val = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "var":
            idx = int(val[1:])
            if idx < 1:
                raise ExprError(f"variable indices are 1-based: {val}")
            return Var(val[0], idx)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprError(f"unexpected {val!r} in {self.text!r}")


def parse(text: str) -> Node:
    return _Parser(text).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _fmt_num(v: float) -> str:
    if not math.isfinite(v):
        raise ExprError("non-finite constant")
    s = repr(float(v))
    return f"({s})" if v < 0 or s.startswith("-") else s


def to_text(node: Node) -> str:
    return _text(node, 0)


def _text(node, ctx):
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return f"{node.kind}{node.index}"
    if isinstance(node, Neg):
        s = "-" + _text(node.operand, 3)
        return f"({s})" if ctx > 3 else s
    p = _PREC[node.op]
    if node.op == "^":
        s = f"{_text(node.left, 5)}^{_text(node.right, 3)}"
    else:
        # left-associative: the right operand needs parentheses at equal precedence
        s = f"{_text(node.left, p)}{node.op}{_text(node.right, p + 1)}"
    return f"({s})" if p < ctx else s


def variables(node: Node) -> set:
    if isinstance(node, Var):
        return {(node.kind, node.index)}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return variables(node.operand)
    return variables(node.left) | variables(node.right)


def substitute(node: Node, mapping: Mapping[tuple, Node]) -> Node:
    """Replace variables ``(kind, index)`` by sub-expressions."""
    if isinstance(node, Var):
        return mapping.get((node.kind, node.index), node)
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, mapping))
    return Bin(node.op, substitute(node.left, mapping), substitute(node.right, mapping))


def to_python(node: Node, var: Callable[[Var], str]) -> str:
    """Python source for the expression, with variables rendered by `var`."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return var(node)
    if isinstance(node, Neg):
        return f"(-{to_python(node.operand, var)})"
    op = "**" if node.op == "^" else node.op
    return f"({to_python(node.left, var)} {op} {to_python(node.right, var)})"


def evaluate(node: Node, x, z=None) -> float:
    """Direct tree-walking evaluation (reference implementation for tests)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        src = x if node.kind == "x" else z
        return src[node.index - 1]
    if isinstance(node, Neg):
        return -evaluate(node.operand, x, z)
    a = evaluate(node.left, x, z)
    b = evaluate(node.right, x, z)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a ** b
