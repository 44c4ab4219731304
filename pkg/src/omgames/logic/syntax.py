"""Infix text syntax for formulas.

Grammar (loosest binding first)::

    formula := ('E' | 'A') var {',' var} '.' formula | impl
    impl    := disj ['->' impl]
    disj    := conj {'|' conj}
    conj    := unary {'&' unary}
    unary   := '!' unary | 'true' | 'false' | comparison | '(' formula ')'
    comparison := expr (op expr)+        op in < <= = != >= >

Rationals are written ``p/q``; ``*`` and ``/`` only with a constant side.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .constraints import Constraint, Lin, UnsupportedTerm, compare
from .dnf import Dnf
from .formula import FALSE, TRUE, And, Atom, Exists, Forall, Formula, Not, Or, from_dnf


class ParseError(ValueError):
    def __init__(self, message: str, pos: int = 0):
        super().__init__(message)
        self.pos = pos


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<id>[^\W\d]\w*'*)|(?P<op><->|->|<=|>=|!=|[<>=!&|()+\-*/.,]))"
)


def tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else (None, None, -1)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None:
            raise ParseError("unexpected end of input", -1)
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1]!r}", tok[2])
        self.i += 1
        return tok

    def formula(self) -> Formula:
        kind, val, _ = self.peek()
        if kind == "id" and val in ("E", "A") and self.peek(1)[0] == "id":
            self.take()
            names = [self.take()[1]]
            while self.peek()[1] == ",":
                self.take()
                names.append(self.take()[1])
            self.take(".")
            body = self.formula()
            for n in reversed(names):
                body = Exists(n, body) if val == "E" else Forall(n, body)
            return body
        return self.impl()

    def impl(self) -> Formula:
        left = self.disj()
        if self.peek()[1] == "->":
            self.take()
            return Or((Not(left), self.impl()))
        if self.peek()[1] == "<->":
            self.take()
            right = self.impl()
            return And((Or((Not(left), right)), Or((Not(right), left))))
        return left

    def disj(self) -> Formula:
        args = [self.conj()]
        while self.peek()[1] == "|":
            self.take()
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self) -> Formula:
        args = [self.unary()]
        while self.peek()[1] == "&":
            self.take()
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if val == "!":
            self.take()
            return Not(self.unary())
        if kind == "id" and val in ("true", "false"):
            self.take()
            return TRUE if val == "true" else FALSE
        if kind == "id" and val in ("E", "A") and self.peek(1)[0] == "id":
            return self.formula()
        if val == "(":
            save = self.i
            try:
                return self.comparison()
            except UnsupportedTerm:
                raise
            except ParseError:
                self.i = save
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        return self.comparison()

    def comparison(self) -> Formula:
        left = self.expr()
        parts = []
        while self.peek()[1] in ("<", "<=", "=", "!=", ">=", ">"):
            op = self.take()[1]
            right = self.expr()
            parts.append(_relation(left, op, right))
            left = right
        if not parts:
            raise ParseError("expected a comparison", self.peek()[2])
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def expr(self) -> Lin:
        out = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            out = out + t if op == "+" else out - t
        return out

    def term(self) -> Lin:
        out = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            f = self.factor()
            out = out * f if op == "*" else out / f
        return out

    def factor(self) -> Lin:
        kind, val, pos = self.take()
        if kind == "num":
            return Lin.of(Fraction(val))
        if kind == "id" and val not in ("true", "false"):
            return Lin.var(val)
        if val == "-":
            return -self.factor()
        if val == "(":
            e = self.expr()
            self.take(")")
            return e
        raise ParseError(f"unexpected token {val!r}", pos)


def _relation(left: Lin, op: str, right: Lin) -> Formula:
    if op == "!=":
        return Or((Atom(compare(left, "<", right)), Atom(compare(left, ">", right))))
    return Atom(compare(left, op, right))


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    if not p.toks:
        raise ParseError("empty formula", 0)
    f = p.formula()
    if p.peek()[0] is not None:
        raise ParseError(f"trailing input at {p.peek()[1]!r}", p.peek()[2])
    return f


def parse_dnf(text: str) -> Dnf:
    from .formula import to_dnf

    return to_dnf(parse_formula(text))


# ---------------------------------------------------------------- printing

def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_constraint(c: Constraint) -> str:
    if len(c.coeffs) == 1:
        (v, k), = c.coeffs
        b = Fraction(c.bound, k)
        op = c.op
        if k < 0:
            op = {"<": ">", "<=": ">=", "=": "="}[op]
        return f"{v} {op} {format_rational(b)}"
    parts = []
    for i, (v, k) in enumerate(c.coeffs):
        sign = "-" if k < 0 else "+"
        mag = abs(k)
        body = v if mag == 1 else f"{mag}*{v}"
        if i == 0:
            parts.append(body if k > 0 else f"-{body}")
        else:
            parts.append(f"{sign} {body}")
    return f"{' '.join(parts)} {c.op} {format_rational(c.bound)}"


def format_formula(f: Formula, top: bool = True) -> str:
    if isinstance(f, Dnf):
        return format_dnf(f)
    if isinstance(f, Atom):
        if isinstance(f.value, bool):
            return "true" if f.value else "false"
        return format_constraint(f.value)
    if isinstance(f, And):
        s = " & ".join(format_formula(a, False) for a in f.args)
        return s if top else f"({s})"
    if isinstance(f, Or):
        s = " | ".join(format_formula(a, False) for a in f.args)
        return s if top else f"({s})"
    if isinstance(f, Not):
        return f"!{format_formula(f.arg, False)}"
    if isinstance(f, (Exists, Forall)):
        q = "E" if isinstance(f, Exists) else "A"
        return f"({q} {f.var}. {format_formula(f.body)})"
    raise TypeError(f)


def format_dnf(d: Dnf) -> str:
    return format_formula(from_dnf(d))
