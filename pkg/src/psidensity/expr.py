"""Parser and evaluator for one-variable arithmetic expressions.

Grammar (infix, no implicit multiplication):

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?          # right-associative
    atom    := NUMBER | 't' | 'pi' | 'e' | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

implemented as a Pratt parser over a hand-rolled tokenizer.  The only free
variable is ``t``.  Known functions: sin cos exp log sqrt abs (1 argument),
pow min max (2 arguments).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import EvalDomainError, ParseError

UNARY_FUNCS = {
    "sin": (math.sin, np.sin),
    "cos": (math.cos, np.cos),
    "exp": (math.exp, np.exp),
    "log": (math.log, np.log),
    "sqrt": (math.sqrt, np.sqrt),
    "abs": (abs, np.abs),
}
BINARY_FUNCS = {
    "pow": (math.pow, np.power),
    "min": (min, np.minimum),
    "max": (max, np.maximum),
}
CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Var:
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Bin:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    pos: int = field(default=-1, compare=False)


Node = Union[Num, Var, Neg, Bin, Call]


@dataclass(frozen=True)
class Expression:
    ast: Node
    source_text: str

    def __call__(self, t):
        if isinstance(t, np.ndarray):
            return evaluate_many(self, t)
        return evaluate(self, t)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            # skip over whitespace-only tails
            if text[pos:].strip() == "":
                break
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


_BIN_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_PREC = 25  # -x^2 parses as -(x^2); -a*b as (-a)*b


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op: str):
        kind, text, pos = self.next()
        if kind != "op" or text != op:
            raise ParseError(f"expected {op!r}", pos)

    def parse(self) -> Node:
        node = self.expression(0)
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected trailing input {text!r}", pos)
        return node

    def expression(self, min_prec: int) -> Node:
        left = self.prefix()
        while True:
            kind, text, pos = self.peek()
            if kind != "op" or text not in _BIN_PREC:
                break
            prec = _BIN_PREC[text]
            if prec < min_prec:
                break
            self.next()
            # '^' is right-associative: allow equal precedence on the right
            right = self.expression(prec if text == "^" else prec + 1)
            left = Bin(text, left, right, pos)
        return left

    def prefix(self) -> Node:
        kind, text, pos = self.next()
        if kind == "num":
            return Num(float(text), pos)
        if kind == "op" and text == "-":
            return Neg(self.expression(_UNARY_PREC), pos)
        if kind == "op" and text == "+":
            return self.expression(_UNARY_PREC)
        if kind == "op" and text == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if kind == "name":
            if text in UNARY_FUNCS or text in BINARY_FUNCS:
                return self.call(text, pos)
            if text == "t":
                return Var(pos)
            if text in CONSTANTS:
                return Num(CONSTANTS[text], pos)
            raise ParseError(f"unknown identifier {text!r}", pos)
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected token {text!r}", pos)

    def call(self, name: str, pos: int) -> Node:
        self.expect("(")
        args = [self.expression(0)]
        while True:
            kind, text, p = self.peek()
            if kind == "op" and text == ",":
                self.next()
                args.append(self.expression(0))
            else:
                break
        self.expect(")")
        arity = 1 if name in UNARY_FUNCS else 2
        if len(args) != arity:
            raise ParseError(f"{name} takes {arity} argument(s), got {len(args)}", pos)
        return Call(name, tuple(args), pos)


def parse(text: str) -> Expression:
    """Parse ``text`` into an Expression; raises ParseError with an offset."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return Expression(_Parser(text).parse(), text)


def to_text(node: Node) -> str:
    """Render an AST back to source; parse(to_text(ast)).ast == ast."""
    return _render(node, 0)


def _render(node: Node, parent_prec: int) -> str:
    if isinstance(node, Num):
        s = repr(node.value)
        # negative literals need parens inside any operator context
        return f"({s})" if node.value < 0 and parent_prec > 0 else s
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Neg):
        inner = _render(node.operand, _UNARY_PREC)
        s = f"-{inner}"
        return f"({s})" if parent_prec > _UNARY_PREC else s
    if isinstance(node, Bin):
        prec = _BIN_PREC[node.op]
        # left child: same precedence is fine except for '^' (right-assoc);
        # right child: needs strictly higher precedence except for '^'
        ls = _render(node.left, prec + 1 if node.op == "^" else prec)
        rs = _render(node.right, prec if node.op == "^" else prec + 1)
        s = f"{ls}{node.op}{rs}"
        return f"({s})" if prec < parent_prec else s
    if isinstance(node, Call):
        args = ",".join(_render(a, 0) for a in node.args)
        return f"{node.name}({args})"
    raise TypeError(f"not an AST node: {node!r}")


def evaluate(e: Expression, t: float) -> float:
    """Strict scalar evaluation; domain faults raise EvalDomainError."""
    return _eval_scalar(e.ast, float(t))


def _eval_scalar(node: Node, t: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Neg):
        return -_eval_scalar(node.operand, t)
    if isinstance(node, Bin):
        a = _eval_scalar(node.left, t)
        b = _eval_scalar(node.right, t)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if b == 0:
                raise EvalDomainError(f"division by zero at offset {node.pos}", node)
            return a / b
        if node.op == "^":
            try:
                r = a ** b
            except (ValueError, ZeroDivisionError) as exc:
                raise EvalDomainError(
                    f"invalid power {a}^{b} at offset {node.pos}", node
                ) from exc
            if isinstance(r, complex):
                raise EvalDomainError(
                    f"non-real power {a}^{b} at offset {node.pos}", node
                )
            return r
        raise AssertionError(node.op)
    if isinstance(node, Call):
        args = [_eval_scalar(a, t) for a in node.args]
        if node.name in UNARY_FUNCS:
            if node.name == "log" and args[0] <= 0:
                raise EvalDomainError(
                    f"log of non-positive value {args[0]} at offset {node.pos}", node
                )
            if node.name == "sqrt" and args[0] < 0:
                raise EvalDomainError(
                    f"sqrt of negative value {args[0]} at offset {node.pos}", node
                )
            try:
                return UNARY_FUNCS[node.name][0](args[0])
            except (ValueError, OverflowError) as exc:
                raise EvalDomainError(
                    f"{node.name}({args[0]}) failed at offset {node.pos}", node
                ) from exc
        try:
            return BINARY_FUNCS[node.name][0](args[0], args[1])
        except (ValueError, OverflowError) as exc:
            raise EvalDomainError(
                f"{node.name}{tuple(args)} failed at offset {node.pos}", node
            ) from exc
    raise TypeError(f"not an AST node: {node!r}")


def evaluate_many(e: Expression, ts: np.ndarray) -> np.ndarray:
    """Vectorized evaluation; domain faults yield NaN entries.

    Callers that need a precise diagnostic re-evaluate the offending point
    with :func:`evaluate`.
    """
    with np.errstate(all="ignore"):
        out = _eval_array(e.ast, np.asarray(ts, dtype=float))
    return np.broadcast_to(out, np.shape(ts)).astype(float) if np.ndim(out) == 0 else out


def _eval_array(node: Node, ts: np.ndarray):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return ts
    if isinstance(node, Neg):
        return -_eval_array(node.operand, ts)
    if isinstance(node, Bin):
        a = _eval_array(node.left, ts)
        b = _eval_array(node.right, ts)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(b != 0, a / np.where(b != 0, b, 1.0), np.nan)
        with np.errstate(invalid="ignore"):
            return np.float_power(a, b)
    if isinstance(node, Call):
        args = [_eval_array(a, ts) for a in node.args]
        fn = (UNARY_FUNCS.get(node.name) or BINARY_FUNCS[node.name])[1]
        return fn(*args)
    raise TypeError(f"not an AST node: {node!r}")
