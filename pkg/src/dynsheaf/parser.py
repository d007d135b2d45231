"""Recursive-descent parser for rational maps written in ``z``.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*`` and ``/``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NUMBER 'i' | 'i' | 'z' | '(' expr ')'

Exponents must evaluate to integer constants.  The value of every node is a
rational function kept as a numerator/denominator pair of polynomials.
"""

import re
from dataclasses import dataclass

from .errors import MapSyntaxError, NonRationalExpression
from .map_core import make_map
from .numerics.poly import Poly
from .numerics.tolerances import DEFAULT

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?[ij]?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(text):
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise MapSyntaxError(f"unexpected character {text[col]!r}", col)
        kind = m.lastgroup
        out.append(Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(Token("end", "", len(text)))
    return out


@dataclass(frozen=True)
class Rational:
    """A rational function ``num/den`` of ``z``."""

    num: Poly
    den: Poly

    @classmethod
    def const(cls, c):
        return cls(Poly([c]), Poly([1]))

    def is_constant(self):
        return self.num.degree <= 0 and self.den.degree == 0

    def constant(self):
        return self.num.coeff(0) / self.den.coeff(0)

    def __add__(self, o):
        return Rational(self.num * o.den + o.num * self.den, self.den * o.den)

    def __sub__(self, o):
        return Rational(self.num * o.den - o.num * self.den, self.den * o.den)

    def __mul__(self, o):
        return Rational(self.num * o.num, self.den * o.den)

    def __truediv__(self, o):
        if o.num.is_zero():
            raise ZeroDivisionError
        return Rational(self.num * o.den, self.den * o.num)

    def __neg__(self):
        return Rational(-self.num, self.den)

    def __pow__(self, k):
        if k < 0:
            if self.num.is_zero():
                raise ZeroDivisionError
            base, k = Rational(self.den, self.num), -k
        else:
            base = self
        out = Rational.const(1.0)
        for _ in range(k):
            out = out * base
        return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def fail(self, what, tok=None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise MapSyntaxError(f"expected {what}, found {found}", tok.column)

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            self.fail("an operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take()
            rhs = self.term()
            node = node + rhs if op.text == "+" else node - rhs
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take()
            rhs = self.unary()
            if op.text == "*":
                node = node * rhs
            else:
                try:
                    node = node / rhs
                except ZeroDivisionError:
                    raise MapSyntaxError("division by zero", op.column) from None
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take()
            node = self.unary()
            return -node if op.text == "-" else node
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            op = self.take()
            exp = self.unary()
            if not exp.is_constant():
                raise NonRationalExpression(f"exponent at column {op.column} depends on z")
            k = exp.constant()
            if abs(k.imag) > 0 or k.real != round(k.real):
                raise NonRationalExpression(f"exponent {k} at column {op.column} is not an integer")
            try:
                return base ** int(round(k.real))
            except ZeroDivisionError:
                raise MapSyntaxError("zero raised to a negative power", op.column) from None
        return base

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.take()
            if t.text[-1] in "ij":
                return Rational.const(complex(0.0, float(t.text[:-1])))
            return Rational.const(float(t.text))
        if t.kind == "name":
            self.take()
            if t.text == "z":
                return Rational(Poly([0, 1]), Poly([1]))
            if t.text in ("i", "j"):
                return Rational.const(1j)
            raise NonRationalExpression(f"unknown name {t.text!r} at column {t.column}")
        if t.kind == "op" and t.text == "(":
            self.take()
            node = self.expr()
            if self.tok.kind != "op" or self.tok.text != ")":
                self.fail("')'")
            self.take()
            return node
        self.fail("a number, 'z' or '('")


def parse_rational(text):
    """The rational function of ``z`` written in ``text`` as a :class:`Rational`."""
    return _Parser(text).parse()


def parse_map(text, tol=DEFAULT):
    """Parse ``text`` into a reduced :class:`RationalMap`."""
    r = parse_rational(text)
    if r.num.is_zero():
        return make_map(Poly([0.0]), r.den, tol)
    return make_map(r.num, r.den, tol)
