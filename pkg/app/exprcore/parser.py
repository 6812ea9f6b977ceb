"""Infix expression grammar.

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" INTEGER)?
    atom   := NUMBER | VARIABLE | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Numbers are read as exact rationals. Variables are x0, x1, ... and `t`,
which names the last coordinate of the ambient space.
"""

import re
import typing as t
from fractions import Fraction

from app.errors import DimensionMismatch, ParseError

from .expr import Abs, Clamp, Const, Div, Expr, Max, Min, Pow, Sqrt, Var

TOKEN = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?|\.\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)

FUNCTIONS = {
    "sqrt": (1, 1),
    "abs": (1, 1),
    "min": (2, 2),
    "max": (2, 2),
    "clamp": (1, 2),
    "div": (2, 2),
}


class _Parser:
    def __init__(self, text: str, dim: int | None) -> None:
        self.text = text
        self.dim = dim
        self.tokens = self._tokenize(text)
        self.pos = 0

    def _tokenize(self, text):
        tokens = []
        index = 0
        while index < len(text):
            if text[index:].strip() == "":
                break
            match = TOKEN.match(text, index)
            if match is None or match.end() == index:
                column = index + len(text[index:]) - len(text[index:].lstrip())
                raise ParseError(
                    f"unexpected character {text[column]!r}", column=column + 1
                )
            kind = match.lastgroup
            start = match.start(kind)
            tokens.append((kind, match.group(kind), start + 1))
            index = match.end()
        tokens.append(("end", "", len(text) + 1))
        return tokens

    @property
    def current(self):
        return self.tokens[self.pos]

    def _advance(self):
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _expect(self, value: str):
        kind, text, column = self.current
        if text != value or kind != "op":
            found = text or "end of input"
            raise ParseError(
                f"expected {value!r}, found {found!r}", column=column
            )
        return self._advance()

    def _unexpected(self):
        kind, text, column = self.current
        found = text or "end of input"
        return ParseError(f"unexpected {found!r}", column=column)

    def parse(self) -> Expr:
        e = self.expr()
        if self.current[0] != "end":
            raise self._unexpected()
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.current[1] in ("+", "-") and self.current[0] == "op":
            op = self._advance()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.current[1] in ("*", "/") and self.current[0] == "op":
            op = self._advance()[1]
            rhs = self.unary()
            e = e * rhs if op == "*" else Div(e, rhs)
        return e

    def unary(self) -> Expr:
        if self.current == ("op", "-", self.current[2]):
            self._advance()
            return -self.unary()
        return self.power()

    def power(self) -> Expr:
        e = self.atom()
        if self.current[0] == "op" and self.current[1] == "^":
            self._advance()
            kind, text, column = self.current
            if kind != "number" or not text.isdigit():
                raise ParseError(
                    "exponent must be a nonnegative integer", column=column
                )
            self._advance()
            e = Pow(e, int(text))
        return e

    def atom(self) -> Expr:
        kind, text, column = self.current
        if kind == "number":
            self._advance()
            return Const(Fraction(text))
        if kind == "op" and text == "(":
            self._advance()
            e = self.expr()
            self._expect(")")
            return e
        if kind == "name":
            self._advance()
            if self.current[0] == "op" and self.current[1] == "(":
                return self.call(text, column)
            return self.variable(text, column)
        raise self._unexpected()

    def variable(self, name: str, column: int) -> Expr:
        if name == "t":
            if not self.dim:
                raise ParseError(
                    "'t' needs a known ambient dimension", column=column
                )
            return Var(self.dim - 1)
        match = re.fullmatch(r"x(\d+)", name)
        if match is None:
            raise ParseError(f"unknown name {name!r}", column=column)
        index = int(match.group(1))
        if self.dim is not None and index >= self.dim:
            raise DimensionMismatch(
                f"{name} at column {column} exceeds dimension {self.dim}"
            )
        return Var(index)

    def call(self, name: str, column: int) -> Expr:
        if name not in FUNCTIONS:
            raise ParseError(f"unknown function {name!r}", column=column)
        self._expect("(")
        args = [self.expr()]
        while self.current[0] == "op" and self.current[1] == ",":
            self._advance()
            args.append(self.expr())
        self._expect(")")
        low, high = FUNCTIONS[name]
        if not low <= len(args) <= high:
            raise ParseError(
                f"{name} takes {low}..{high} arguments, got {len(args)}",
                column=column,
            )
        if name == "sqrt":
            return Sqrt(args[0])
        if name == "abs":
            return Abs(args[0])
        if name == "min":
            return Min(args[0], args[1])
        if name == "max":
            return Max(args[0], args[1])
        if name == "div":
            return Div(args[0], args[1])
        power = 1
        if len(args) == 2:
            exponent = args[1]
            if (
                not isinstance(exponent, Const)
                or exponent.value.denominator != 1
                or exponent.value < 1
            ):
                raise ParseError(
                    "clamp power must be a positive integer", column=column
                )
            power = int(exponent.value)
        return Clamp(args[0], power)


def parse_expr(text: str, dim: int | None = None) -> Expr:
    return _Parser(text, dim).parse()


def parse_matrix(rows: t.Sequence[t.Sequence], dim: int | None = None):
    """Rows of expression texts (or numbers) as nested tuples of Expr."""
    out = []
    for row in rows:
        out.append(
            tuple(
                parse_expr(str(v), dim) if isinstance(v, str) else _number(v)
                for v in row
            )
        )
    return tuple(out)


def _number(value) -> Expr:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected an expression, got {value!r}")
    if isinstance(value, int):
        return Const(Fraction(value))
    return Const(Fraction(str(value)))
