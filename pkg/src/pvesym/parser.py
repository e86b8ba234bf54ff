"""Recursive-descent parser for the plain-text expression language.

Grammar (whitespace is ignored)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("+" | "-") unary | power
    power   := atom (("^" | "**") unary)?
    atom    := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
    NUMBER  := digits ["." digits] [("e"|"E") ["+"|"-"] digits]
    IDENT   := letter (letter | digit | "_")*

Exponents must reduce to rational constants.  Functions: sin, cos, exp,
ln (alias log), sqrt, arctan (alias atan) and the two-argument arctan2.
The Greek letters psi, beta, zeta, epsilon may be written as unicode.
"""
from __future__ import annotations

import re
from fractions import Fraction

from . import expr as E

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[^\W\d]\w*)|(?P<op>\*\*|[-+*/^(),]))"
)
_ALIASES = {"ψ": "psi", "β": "beta", "ζ": "zeta", "ε": "eps", "λ": "lam"}
_FUNCS = {"sin", "cos", "exp", "ln", "log", "sqrt", "arctan", "atan", "arctan2", "atan2"}


class ParseError(E.ExprError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position


def tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + bad]!r}", pos + bad)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)

    def parse(self):
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            _, op, _ = self.take()
            rhs = self.term()
            e = E.add(e, rhs) if op == "+" else E.add(e, E.neg(rhs))
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, op, pos = self.take()
            rhs = self.unary()
            if op == "*":
                e = E.mul(e, rhs)
            else:
                if rhs.is_zero:
                    raise ParseError("division by zero", pos)
                e = E.mul(e, E.power(rhs, -1))
        return e

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text in ("+", "-"):
            self.take()
            e = self.unary()
            return e if text == "+" else E.neg(e)
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, pos = self.peek()
        if text in ("^", "**"):
            self.take()
            exponent = self.unary()
            if not isinstance(exponent, E.Const):
                raise ParseError("exponent must be a rational constant", pos)
            if base.is_zero and exponent.value < 0:
                raise ParseError("division by zero", pos)
            return E.power(base, exponent.value)
        return base

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return E.Const(Fraction(text))
        if kind == "ident":
            name = _ALIASES.get(text, text)
            if self.peek()[1] == "(":
                if name not in _FUNCS:
                    raise ParseError(f"unknown function {name!r}", pos)
                self.take()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                return _call(name, args, pos)
            return E.Sym(name)
        if text == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected token {text or 'end of input'!r}", pos)


def _call(name, args, pos):
    if name in ("arctan2", "atan2"):
        if len(args) != 2:
            raise ParseError("arctan2 takes two arguments", pos)
        return E.atan2(*args)
    if len(args) != 1:
        raise ParseError(f"{name} takes one argument", pos)
    return E.func(name, args[0])


def parse(text: str) -> E.Expr:
    """Parse ``text`` into a canonical expression."""
    return _Parser(text).parse()
