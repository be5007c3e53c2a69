"""Recursive-descent parser for arithmetic expressions.

Grammar (lowest to highest precedence)::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | NAME | FUNC '(' sum ')' | '(' sum ')'

``**`` is accepted as a synonym for ``^``.  The power binds tighter than
unary minus, so ``-x^2`` is ``-(x^2)``, while ``2^-1`` is allowed.
"""

from __future__ import annotations

import math
import re
from typing import Iterable, Sequence

from hamgeom.expr.errors import ParseError, UnknownIdentifierError
from hamgeom.expr.nodes import UNARY_FUNCTIONS, Binary, Const, Coord, Node, Param, Unary

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)

_ALIASES = {"atan": "arctan", "ln": "log"}
_NAMED_CONSTANTS = {"pi": math.pi}


class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind: str, text: str, offset: int):
        self.kind = kind
        self.text = text
        self.offset = offset


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        if kind != "ws":
            tok = m.group()
            if tok == "**":
                tok = "^"
            tokens.append(_Token(kind, tok, _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(_Token("end", "", _byte_offset(text, len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str, coordinates: Sequence[str], parameters: Iterable[str]):
        self.text = text
        self.coords = {name: i for i, name in enumerate(coordinates)}
        self.params = set(parameters)
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.tok
        if tok.kind == "end":
            message = f"{message} (unexpected end of input)"
        return ParseError(message, tok.offset, self.text)

    def accept(self, *ops: str) -> _Token | None:
        if self.tok.kind == "op" and self.tok.text in ops:
            tok = self.tok
            self.pos += 1
            return tok
        return None

    def expect(self, op: str) -> None:
        if self.accept(op) is None:
            raise self.error(f"expected {op!r}")

    def parse(self) -> Node:
        if self.tok.kind == "end":
            raise self.error("empty expression")
        node = self.sum()
        if self.tok.kind != "end":
            raise self.error(f"unexpected token {self.tok.text!r}")
        return node

    def sum(self) -> Node:
        node = self.product()
        while (tok := self.accept("+", "-")) is not None:
            node = Binary(tok.text, node, self.product())
        return node

    def product(self) -> Node:
        node = self.unary()
        while (tok := self.accept("*", "/")) is not None:
            node = Binary(tok.text, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            # a bare literal is folded into a negative constant (negation is
            # exact); "-2^2" still means -(2^2)
            nxt = self.tokens[self.pos + 1]
            if self.tok.kind == "num" and not (nxt.kind == "op" and nxt.text == "^"):
                self.pos += 1
                return Const(-float(self.tokens[self.pos - 1].text))
            return Unary("neg", self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.accept("^"):
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return Const(float(tok.text))
        if tok.kind == "name":
            self.pos += 1
            name = tok.text
            if name in self.coords:
                return Coord(name, self.coords[name])
            if name in self.params:
                return Param(name)
            func = _ALIASES.get(name, name)
            if func in UNARY_FUNCTIONS:
                self.expect("(")
                arg = self.sum()
                self.expect(")")
                return Unary(func, arg)
            if name in _NAMED_CONSTANTS:
                return Const(_NAMED_CONSTANTS[name])
            raise UnknownIdentifierError(name, tok.offset, self.text)
        if self.accept("("):
            node = self.sum()
            self.expect(")")
            return node
        raise self.error("expected a number, name or '('")


def parse_tree(text: str, coordinates: Sequence[str], parameters: Iterable[str] = ()) -> Node:
    coordinates = list(coordinates)
    parameters = set(parameters)
    clash = set(coordinates) & parameters
    if clash:
        raise ValueError(f"names used both as coordinate and parameter: {sorted(clash)}")
    if len(set(coordinates)) != len(coordinates):
        raise ValueError("duplicate coordinate names")
    return _Parser(text, coordinates, parameters).parse()
