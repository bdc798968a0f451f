"""Recursive-descent parser for the expression mini-language.

    expr    := term (("+" | "-") term)*
    term    := factor (("*" | "/") factor)*
    factor  := "-" factor | atom ("^" exponent)?
    exponent:= ["-"] integer | "(" ["-"] (integer | rational) ")"
    atom    := number | ident | func "(" expr ("," expr)* ")" | "(" expr ")"
    number  := integer ("/" integer)? | decimal

A rational literal ``3/5`` must be written without spaces; ``3 / 5`` is a
division. Unary minus binds looser than ``^``, so ``-x^2`` is ``-(x^2)``.
A bare exponent is an integer (``x^2/3`` is ``(x^2)/3``); rational
exponents are parenthesised, as in ``x^(1/2)``.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .nodes import (
    FUNCTIONS,
    Expr,
    ParseError,
    UnknownFunctionError,
    UnknownIdentifierError,
    add,
    div,
    fn,
    mul,
    neg,
    num,
    pow_,
    sub,
    sym,
)
from .space import VarSpace

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<rat>\d+/\d+(?![.\deE]))
  | (?P<dec>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


class _Tok:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind, self.text, self.pos = kind, text, pos


def _tokenize(text: str) -> list[_Tok]:
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", _byte_offset(text, i))
        kind = m.lastgroup
        if kind != "ws":
            out.append(_Tok(kind, m.group(), i))
        i = m.end()
    out.append(_Tok("end", "", len(text)))
    return out


def _byte_offset(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, space: VarSpace | None):
        self.text = text
        self.space = space
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None, cls=ParseError):
        tok = tok or self.peek()
        where = "end of input" if tok.kind == "end" else repr(tok.text)
        raise cls(f"{msg}, found {where}", _byte_offset(self.text, tok.pos))

    def expect(self, op: str) -> None:
        t = self.peek()
        if t.kind == "op" and t.text == op:
            self.i += 1
            return
        self.error(f"expected {op!r}")

    def is_op(self, *ops) -> bool:
        t = self.peek()
        return t.kind == "op" and t.text in ops

    def parse(self) -> Expr:
        if self.peek().kind == "end":
            self.error("empty expression")
        e = self.expr()
        if self.peek().kind != "end":
            self.error("unexpected token")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.is_op("+", "-"):
            op = self.take().text
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.is_op("*", "/"):
            op = self.take().text
            rhs = self.factor()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def factor(self) -> Expr:
        if self.is_op("-"):
            self.take()
            return neg(self.factor())
        base = self.atom()
        if self.is_op("^"):
            self.take()
            return pow_(base, self.exponent())
        return base

    def exponent(self) -> Fraction:
        if self.is_op("("):
            self.take()
            k = self.signed_rational(True)
            self.expect(")")
            return k
        return self.signed_rational(False)

    def signed_rational(self, allow_ratio: bool) -> Fraction:
        sign = 1
        if self.is_op("-"):
            self.take()
            sign = -1
        t = self.peek()
        if t.kind == "rat" and not allow_ratio:
            # x^2/3 is (x^2)/3: keep the numerator, leave "/3" in the stream
            top, bottom = t.text.split("/")
            cut = t.pos + len(top)
            self.toks[self.i:self.i + 1] = [
                _Tok("dec", top, t.pos), _Tok("op", "/", cut), _Tok("dec", bottom, cut + 1)]
            t = self.peek()
        if t.kind == "rat" or (t.kind == "dec" and t.text.isdigit()):
            self.take()
            return sign * Fraction(t.text)
        self.error("expected an integer exponent, or a rational one in parentheses")

    def atom(self) -> Expr:
        t = self.peek()
        if t.kind in ("rat", "dec"):
            self.take()
            return num(Fraction(t.text))
        if t.kind == "ident":
            self.take()
            if self.is_op("("):
                return self.call(t)
            if self.space is not None and t.text not in self.space:
                self.error(f"unknown identifier {t.text!r}", t, UnknownIdentifierError)
            return sym(t.text)
        if self.is_op("("):
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected a number, identifier or '('")

    def call(self, name_tok: _Tok) -> Expr:
        name = name_tok.text
        if name not in FUNCTIONS:
            self.error(f"unknown function {name!r}", name_tok, UnknownFunctionError)
        self.expect("(")
        args = [self.expr()]
        while self.is_op(","):
            self.take()
            args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            self.error(f"{name} takes exactly one argument", name_tok)
        return fn(name, args[0])


def parse(text: str, space: VarSpace | None = None) -> Expr:
    """Parse ``text`` into an unsimplified expression tree.

    When ``space`` is given, every identifier must be one of its names.
    """
    if not isinstance(text, str):
        raise TypeError("parse expects a string")
    return _Parser(text, space).parse()
