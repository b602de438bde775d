"""Recursive-descent parser for the flow/reset expression grammar.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*``/``/``, which bind tighter than ``+``/``-``; binary operators are
left associative)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" INT)*
    primary := NUMBER | NAME | FUNC "(" expr ")" | "q(" NAME ")" | "(" expr ")"

``t`` is reserved for time and ``q(name)`` denotes the quantized signal of
a state variable.  A minus sign directly in front of a numeric literal is
folded into the literal.
"""

from __future__ import annotations

import math
import re
from typing import NamedTuple

from .nodes import FUNCTIONS, Add, Const, Div, Expr, Mul, Neg, Pow, QuantizedVar, Sub, Time, Var


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.message = message
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class Token(NamedTuple):
    kind: str  # NUMBER, NAME, OP, END
    text: str
    pos: int


_TOKEN = re.compile(
    r"\s*(?:(?P<NUMBER>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<NAME>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<OP>[-+*/^()]))"
)

RESERVED = {"t", "q", *FUNCTIONS}


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(Token("END", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.pos, self.text)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("OP",):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "END":
            raise self.error(f"unexpected {self.tok.text!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "OP" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "OP" and self.tok.text in "*/":
            op = self.tok
            self.i += 1
            right = self.unary()
            if op.text == "*":
                left = Mul(left, right)
            else:
                if isinstance(right, Const) and right.value == 0:
                    raise self.error("division by the constant zero", op)
                left = Div(left, right)
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "OP" and self.tok.text == "-":
            nxt, after = self.peek(1), self.peek(2)
            if nxt.kind == "NUMBER" and after.text != "^":
                self.i += 2
                return Const(-float(nxt.text))
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        while self.tok.kind == "OP" and self.tok.text == "^":
            self.i += 1
            tok = self.tok
            if tok.kind != "NUMBER":
                raise self.error("exponent must be a non-negative integer literal")
            value = float(tok.text)
            if not value.is_integer():
                raise self.error(f"non-integer exponent {tok.text!r}")
            self.i += 1
            base = Pow(base, int(value))
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "NUMBER":
            self.i += 1
            value = float(tok.text)
            if not math.isfinite(value):
                raise self.error(f"literal out of range {tok.text!r}", tok)
            return Const(value)
        if tok.kind == "NAME":
            self.i += 1
            is_call = self.tok.kind == "OP" and self.tok.text == "("
            if tok.text == "q" and is_call:
                self.i += 1
                name = self.tok
                if name.kind != "NAME" or name.text in RESERVED:
                    raise self.error("q(...) takes a variable name")
                self.i += 1
                self.expect(")")
                return QuantizedVar(name.text)
            if is_call:
                if tok.text not in FUNCTIONS:
                    raise self.error(f"unknown function {tok.text!r}", tok)
                self.i += 1
                arg = self.expr()
                self.expect(")")
                return FUNCTIONS[tok.text](arg)
            if tok.text == "t":
                return Time()
            if tok.text in RESERVED:
                raise self.error(f"{tok.text!r} is reserved", tok)
            return Var(tok.text)
        if tok.kind == "OP" and tok.text == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into an expression tree; raises :class:`ParseError`."""
    return _Parser(text).parse()
