"""Expression grammar, parser and canonical printer.

Grammar (precedence high to low)::

    atom     := INTEGER | NAME | D<var> | "(" expr ")"
    power    := atom [ "^" INTEGER ]
    unary    := ("-" | "+") unary | power
    product  := unary (("*" | "/") unary)*
    expr     := product (("+" | "-") product)*

``*`` is composition, so products expand noncommutatively left to right.
A divisor must be a function: derivations are not invertible here.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Mapping

from .errors import DivisionByZero, ExprSyntaxError, InputError, NegativeExponent, UnknownSymbol
from .field import FieldTower, RationalExpr
from .operators import Lpdo, compose, multi_index

__all__ = [
    "parse_operator", "parse_expr", "format_operator", "format_expr",
    "operator_to_json", "operator_from_json",
]

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()])|(?P<bad>\S))")


@dataclass(frozen=True)
class Token:
    kind: str  # num, name, op, end
    value: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            break
        kind = m.lastgroup
        if kind == "bad":
            raise ExprSyntaxError(f"unexpected character {m.group(kind)!r}", text, m.start(kind))
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


# -- AST --------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int
    pos: int


@dataclass(frozen=True)
class Name:
    name: str
    pos: int


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object
    pos: int


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object
    pos: int


@dataclass(frozen=True)
class Power:
    base: object
    exponent: int
    pos: int


_BINARY_POWER = {"+": 10, "-": 10, "*": 20, "/": 20}
_UNARY_POWER = 30


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, msg, tok=None):
        tok = tok or self.tok
        raise ExprSyntaxError(msg, self.text, tok.pos)

    def parse(self):
        if self.tok.kind == "end":
            self.error("empty expression")
        node = self.expression(0)
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.value!r}")
        return node

    def expression(self, min_bp):
        left = self.prefix()
        while True:
            t = self.tok
            if t.kind != "op" or t.value not in _BINARY_POWER:
                break
            bp = _BINARY_POWER[t.value]
            if bp <= min_bp:
                break
            self.advance()
            right = self.expression(bp)
            left = Binary(t.value, left, right, t.pos)
        return left

    def prefix(self):
        t = self.tok
        if t.kind == "op" and t.value in "+-":
            self.advance()
            return Unary(t.value, self.expression(_UNARY_POWER), t.pos)
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.value == "^":
            caret = self.advance()
            t = self.tok
            if t.kind == "op" and t.value == "-":
                raise NegativeExponent(f"negative exponent at column {t.pos + 1}; write 1/(...) instead")
            if t.kind != "num":
                self.error("exponent must be a non-negative integer literal")
            self.advance()
            return Power(base, int(t.value), caret.pos)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(int(t.value), t.pos)
        if t.kind == "name":
            self.advance()
            return Name(t.value, t.pos)
        if t.kind == "op" and t.value == "(":
            self.advance()
            node = self.expression(0)
            if not (self.tok.kind == "op" and self.tok.value == ")"):
                self.error("expected ')'")
            self.advance()
            return node
        if t.kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {t.value!r}")


def parse_ast(text: str):
    return Parser(text).parse()


# -- evaluation -------------------------------------------------------------

class _Evaluator:
    def __init__(self, text, tower, names):
        self.text = text
        self.tower = tower
        self.names = names or {}

    def eval(self, node) -> Lpdo:
        tower = self.tower
        if isinstance(node, Num):
            return Lpdo.function(tower.const(node.value), tower)
        if isinstance(node, Name):
            return self.name(node)
        if isinstance(node, Unary):
            value = self.eval(node.operand)
            return -value if node.op == "-" else value
        if isinstance(node, Power):
            base = self.eval(node.base)
            f = base.as_function()
            if f is not None:
                return Lpdo.function(f ** node.exponent, tower)
            return base ** node.exponent
        if isinstance(node, Binary):
            left = self.eval(node.left)
            right = self.eval(node.right)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return compose(left, right)
            f = right.as_function()
            if f is None:
                raise ExprSyntaxError("cannot divide by a differential operator", self.text, node.pos)
            if f.is_zero():
                raise DivisionByZero(f"division by zero at column {node.pos + 1}")
            g = left.as_function()
            if g is not None:
                return Lpdo.function(g / f, tower)
            return compose(left, Lpdo.function(f.inverse(), tower))
        raise TypeError(node)

    def name(self, node: Name) -> Lpdo:
        tower = self.tower
        name = node.name
        if name in self.names:
            value = self.names[name]
            if isinstance(value, Lpdo):
                return value
            return Lpdo.function(tower.coerce(value), tower)
        if name in tower.names:
            return Lpdo.function(tower.symbol(name), tower)
        if name.startswith("D") and name[1:] in tower.vars:
            return Lpdo.derivation(tower, name[1:])
        raise UnknownSymbol(f"unknown symbol {name!r} at line 1, column {node.pos + 1}"
                            if "\n" not in self.text else f"unknown symbol {name!r}")


def parse_operator(text: str, tower: FieldTower, names: Mapping[str, object] | None = None) -> Lpdo:
    """Parse operator text into a canonical Lpdo.

    ``names`` optionally binds identifiers to previously built operators or
    field elements.
    """
    return _Evaluator(text, tower, names).eval(parse_ast(text))


def parse_expr(text: str, tower: FieldTower, names: Mapping[str, object] | None = None) -> RationalExpr:
    op = parse_operator(text, tower, names)
    f = op.as_function()
    if f is None:
        raise InputError(f"expected a function, got an operator: {text!r}")
    return f


# -- printing ---------------------------------------------------------------

def format_expr(f: RationalExpr) -> str:
    return str(f)


def _atom_str(tower, idx, atom, sep):
    parts = []
    for v, e in zip(tower.vars, idx):
        if e == 1:
            parts.append(f"{atom}{v}")
        elif e:
            parts.append(f"{atom}{v}^{e}")
    return sep.join(parts)


def _term(c: RationalExpr, dpart: str):
    if not dpart:
        # inline a bare polynomial: only its leading sign may move into the join
        s = str(c)
        return (True, s[1:]) if s.startswith("-") else (False, s)
    neg = c.is_negative()
    a = -c if neg else c
    if a.is_one():
        return neg, dpart
    s = str(a)
    if a.is_polynomial() and len(a.num) > 1:
        s = f"({s})"
    return neg, f"{s}*{dpart}"


def format_terms(tower: FieldTower, terms: Mapping[tuple, RationalExpr], atom: str = "D", sep: str = "*") -> str:
    from .field import join_terms
    return join_terms([_term(c, _atom_str(tower, idx, atom, sep)) for idx, c in terms.items()])


def format_operator(A: Lpdo, mode: str = "text") -> str:
    """Canonical rendering; ``mode`` is ``"text"`` or ``"json"``."""
    if mode == "json":
        return json.dumps(operator_to_json(A))
    if mode != "text":
        raise ValueError(f"unknown format mode {mode!r}")
    return format_terms(A.tower, A.terms)


def operator_to_json(A: Lpdo) -> list[dict]:
    return [
        {"index": {v: e for v, e in zip(A.tower.vars, idx) if e}, "coeff": str(c)}
        for idx, c in A.items()
    ]


def operator_from_json(data, tower: FieldTower) -> Lpdo:
    if isinstance(data, str):
        data = json.loads(data)
    return Lpdo(tower, [(multi_index(tower, item["index"]), parse_expr(item["coeff"], tower))
                        for item in data])
