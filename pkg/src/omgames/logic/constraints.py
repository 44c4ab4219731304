"""Linear expressions and normalized linear constraints over exact rationals.

A constraint ``sum(c_i * v_i) op bound`` is stored with integer coefficients
divided by their gcd, so syntactically equal constraints compare equal and
hash alike.  ``op`` is one of ``<``, ``<=``, ``=``.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Mapping, NamedTuple, Union

Number = Union[int, Fraction]

OPS = ("<", "<=", "=")


class UnsupportedTerm(ValueError):
    """Raised for terms outside linear arithmetic."""


class Lin:
    """Affine expression ``sum(coeffs[v] * v) + const`` with rational data."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: Mapping[str, Number] | None = None, const: Number = 0):
        self.coeffs = {v: Fraction(c) for v, c in (coeffs or {}).items() if c != 0}
        self.const = Fraction(const)

    @classmethod
    def var(cls, name: str) -> "Lin":
        return cls({name: 1})

    @classmethod
    def of(cls, value) -> "Lin":
        if isinstance(value, Lin):
            return value
        return cls({}, value)

    def is_const(self) -> bool:
        return not self.coeffs

    def __add__(self, other) -> "Lin":
        other = Lin.of(other)
        out = dict(self.coeffs)
        for v, c in other.coeffs.items():
            out[v] = out.get(v, 0) + c
        return Lin(out, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "Lin":
        return Lin({v: -c for v, c in self.coeffs.items()}, -self.const)

    def __sub__(self, other) -> "Lin":
        return self + (-Lin.of(other))

    def __rsub__(self, other) -> "Lin":
        return Lin.of(other) - self

    def __mul__(self, other) -> "Lin":
        other = Lin.of(other)
        if self.is_const():
            k = self.const
            return Lin({v: k * c for v, c in other.coeffs.items()}, k * other.const)
        if other.is_const():
            return other * self
        raise UnsupportedTerm("unsupported term: product of two non-constant expressions")

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Lin":
        other = Lin.of(other)
        if not other.is_const() or other.const == 0:
            raise UnsupportedTerm("unsupported term: division by a non-constant or zero")
        return self * Lin.of(1 / other.const)

    def evaluate(self, point: Mapping[str, Number]) -> Fraction:
        return sum((c * point[v] for v, c in self.coeffs.items()), self.const)

    def __repr__(self) -> str:
        return f"Lin({self.coeffs!r}, {self.const!r})"


class Constraint(NamedTuple):
    coeffs: tuple  # sorted tuple of (variable, nonzero int)
    op: str
    bound: int

    @property
    def variables(self) -> frozenset:
        return frozenset(v for v, _ in self.coeffs)

    def coeff(self, var: str) -> int:
        for v, c in self.coeffs:
            if v == var:
                return c
        return 0

    def holds(self, point: Mapping[str, Number]) -> bool:
        lhs = sum(c * point[v] for v, c in self.coeffs)
        return _compare(lhs, self.op, self.bound)

    def lhs(self) -> Lin:
        return Lin(dict(self.coeffs))


def _compare(lhs, op: str, rhs) -> bool:
    if op == "<":
        return lhs < rhs
    if op == "<=":
        return lhs <= rhs
    return lhs == rhs


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def make(coeffs: Mapping[str, Number], op: str, bound: Number):
    """Normalize ``coeffs . v op bound``.

    Returns a :class:`Constraint`, or a bool when no variable remains.
    """
    items = [(v, Fraction(c)) for v, c in coeffs.items() if c != 0]
    bound = Fraction(bound)
    if not items:
        return _compare(0, op, bound)
    den = bound.denominator
    for _, c in items:
        den = _lcm(den, c.denominator)
    ints = sorted((v, int(c * den)) for v, c in items)
    b = int(bound * den)
    g = abs(b)
    for _, c in ints:
        g = gcd(g, c)
    if g > 1:
        ints = [(v, c // g) for v, c in ints]
        b //= g
    if op == "=" and ints[0][1] < 0:
        ints = [(v, -c) for v, c in ints]
        b = -b
    return Constraint(tuple(ints), op, b)


def from_int_coeffs(coeffs: tuple, op: str, bound: int):
    """Fast path of :func:`make` for integer data already sorted by variable."""
    if not coeffs:
        return _compare(0, op, bound)
    g = abs(bound)
    for _, c in coeffs:
        g = gcd(g, c)
    if g > 1:
        coeffs = tuple((v, c // g) for v, c in coeffs)
        bound //= g
    if op == "=" and coeffs[0][1] < 0:
        coeffs = tuple((v, -c) for v, c in coeffs)
        bound = -bound
    return Constraint(coeffs, op, bound)


def compare(lhs: Lin, op: str, rhs: Lin):
    """Build the normalized form of ``lhs op rhs`` for op in <, <=, =, >, >=."""
    if op in (">", ">="):
        lhs, rhs, op = rhs, lhs, "<" if op == ">" else "<="
    diff = lhs - rhs
    return make(diff.coeffs, op, -diff.const)


def negate(c: Constraint) -> list:
    """Disjuncts equivalent to the negation of ``c``."""
    neg = tuple((v, -k) for v, k in c.coeffs)
    if c.op == "<":
        return [Constraint(neg, "<=", -c.bound)]
    if c.op == "<=":
        return [Constraint(neg, "<", -c.bound)]
    return [Constraint(c.coeffs, "<", c.bound), Constraint(neg, "<", -c.bound)]


def closure(c: Constraint) -> Constraint:
    return Constraint(c.coeffs, "<=", c.bound) if c.op == "<" else c


def substitute(c: Constraint, mapping: Mapping[str, Lin]):
    """Replace variables by affine expressions; untouched variables stay."""
    expr = Lin()
    for v, k in c.coeffs:
        expr = expr + (mapping[v] * k if v in mapping else Lin({v: k}))
    return make(expr.coeffs, c.op, c.bound - expr.const)


def hyperplane(c: Constraint) -> Constraint:
    """The boundary ``coeffs . v = bound`` with a canonical orientation."""
    return from_int_coeffs(c.coeffs, "=", c.bound)
