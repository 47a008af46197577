"""Recursive-descent parser for the scalar expression language.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import re
from typing import NamedTuple

from .errors import ArityError, ParseError, UnknownIdentifierError
from .nodes import CONSTANTS, FUNCTIONS, BinOp, Call, Constant, Neg, Node, Number, Var

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")


class Token(NamedTuple):
    kind: str
    text: str
    offset: int


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        match = _TOKEN.match(source, pos)
        if match is None:
            raise ParseError(f"unexpected character {source[pos]!r}", _byte_offset(source, pos))
        kind = match.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, match.group(), _byte_offset(source, pos)))
        pos = match.end()
    tokens.append(Token("end", "", _byte_offset(source, len(source))))
    return tokens


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


class _Parser:
    def __init__(self, source: str, variables: tuple[str, ...]):
        self.tokens = tokenize(source)
        self.pos = 0
        self.index_of = {name: i for i, name in enumerate(variables)}

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at_op(self, *ops: str) -> bool:
        tok = self.peek
        return tok.kind == "op" and tok.text in ops

    def expect_op(self, op: str) -> Token:
        if not self.at_op(op):
            raise ParseError(f"unexpected {_describe(self.peek)}", self.peek.offset, repr(op))
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.peek.kind != "end":
            raise ParseError(
                f"unexpected {_describe(self.peek)}",
                self.peek.offset,
                "an operator or end of input",
            )
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.at_op("*", "/"):
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.at_op("-"):
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at_op("^"):
            self.advance()
            # right operand is a factor, so 2^3^2 == 2^(3^2) and 2^-1 is legal
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Node:
        tok = self.peek
        if tok.kind == "number":
            self.advance()
            return Number(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            if self.at_op("("):
                return self.call(tok)
            if tok.text in self.index_of:
                return Var(tok.text, self.index_of[tok.text])
            if tok.text in CONSTANTS:
                return Constant(tok.text)
            raise UnknownIdentifierError(tok.text, tok.offset)
        if self.at_op("("):
            self.advance()
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(
            f"unexpected {_describe(tok)}", tok.offset, "a number, identifier or '('"
        )

    def call(self, name: Token) -> Node:
        if name.text not in FUNCTIONS:
            raise UnknownIdentifierError(name.text, name.offset)
        self.expect_op("(")
        if self.at_op(")"):
            self.advance()
            raise ArityError(name.text, 0, name.offset)
        args = [self.expr()]
        while self.at_op(","):
            self.advance()
            args.append(self.expr())
        self.expect_op(")")
        if len(args) != 1:
            raise ArityError(name.text, len(args), name.offset)
        return Call(name.text, args[0])


def _describe(tok: Token) -> str:
    return "end of input" if tok.kind == "end" else repr(tok.text)


def parse_node(source: str, variables: tuple[str, ...]) -> Node:
    if not source or not source.strip():
        raise ParseError("empty expression", 0, "an expression")
    for name in variables:
        if not _IDENT.match(name):
            raise ValueError(f"invalid variable name {name!r}")
        if name in FUNCTIONS:
            raise ValueError(f"variable name {name!r} shadows a function")
    if len(set(variables)) != len(variables):
        raise ValueError(f"duplicate variable names in {variables!r}")
    return _Parser(source, variables).parse()
