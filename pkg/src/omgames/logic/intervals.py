"""Intervals of the rational line and one-variable decomposition.

An interval is stored with exact endpoints; ``None`` stands for an infinite
end.  :meth:`Interval.encode` produces the six-number code
``(a1, a2, a3, b1, b2, b3)``: the left endpoint is ``a1/a2`` (``a2 = 0``
meaning infinite, with ``a1`` giving the sign) and ``a3`` flags a closed end;
likewise for the right endpoint.  ``{x >= 5}`` encodes as ``(5, 1, 1, 1, 0, 0)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .dnf import Dnf, simplify_term, term_sat
from .formula import ContractViolation, Formula, to_dnf


@dataclass(frozen=True, order=False)
class Interval:
    lo: Optional[Fraction]
    lo_closed: bool
    hi: Optional[Fraction]
    hi_closed: bool

    def __post_init__(self):
        if self.lo is None and self.lo_closed or self.hi is None and self.hi_closed:
            raise ValueError("infinite ends are open")
        if self.lo is not None and self.hi is not None:
            if self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed)):
                raise ValueError("empty interval")

    @classmethod
    def point(cls, v) -> "Interval":
        v = Fraction(v)
        return cls(v, True, v, True)

    @classmethod
    def closed(cls, a, b) -> "Interval":
        return cls(Fraction(a), True, Fraction(b), True)

    @classmethod
    def from_code(cls, code) -> "Interval":
        a1, a2, a3, b1, b2, b3 = (Fraction(x) for x in code)
        lo = None if a2 == 0 else a1 / a2
        hi = None if b2 == 0 else b1 / b2
        return cls(lo, bool(a3) and lo is not None, hi, bool(b3) and hi is not None)

    def encode(self) -> tuple:
        if self.lo is None:
            left = (Fraction(-1), Fraction(0), Fraction(0))
        else:
            left = (self.lo, Fraction(1), Fraction(int(self.lo_closed)))
        if self.hi is None:
            right = (Fraction(1), Fraction(0), Fraction(0))
        else:
            right = (self.hi, Fraction(1), Fraction(int(self.hi_closed)))
        return left + right

    @property
    def is_point(self) -> bool:
        return self.lo is not None and self.lo == self.hi

    def contains(self, v) -> bool:
        v = Fraction(v)
        if self.lo is not None and (v < self.lo or (v == self.lo and not self.lo_closed)):
            return False
        if self.hi is not None and (v > self.hi or (v == self.hi and not self.hi_closed)):
            return False
        return True

    def has_min(self) -> bool:
        return self.lo is not None and self.lo_closed

    def sample(self) -> Fraction:
        """A deterministic interior-ish member."""
        if self.is_point:
            return self.lo
        if self.lo is not None and self.hi is not None:
            return (self.lo + self.hi) / 2
        if self.lo is not None:
            return self.lo + 1
        if self.hi is not None:
            return self.hi - 1
        return Fraction(0)

    def _left_key(self):
        # order by left endpoint; closed before open at equal values
        return (0, 0) if self.lo is None else (1, self.lo, 0 if self.lo_closed else 1)

    def __str__(self):
        from .syntax import format_rational

        l = "(-inf" if self.lo is None else ("[" if self.lo_closed else "(") + format_rational(self.lo)
        r = "+inf)" if self.hi is None else format_rational(self.hi) + ("]" if self.hi_closed else ")")
        if self.is_point:
            return "{" + format_rational(self.lo) + "}"
        return f"{l}, {r}"


def _touches(a: Interval, b: Interval) -> bool:
    """True when ``a`` (left of or overlapping ``b``) unions with ``b`` into one interval."""
    if a.hi is None or b.lo is None:
        return True
    if a.hi > b.lo:
        return True
    if a.hi == b.lo:
        return a.hi_closed or b.lo_closed
    return False


def _later_hi(a: Interval, b: Interval):
    if a.hi is None:
        return a.hi, False
    if b.hi is None:
        return b.hi, False
    if a.hi != b.hi:
        return (a.hi, a.hi_closed) if a.hi > b.hi else (b.hi, b.hi_closed)
    return a.hi, a.hi_closed or b.hi_closed


def merge_intervals(items) -> list:
    """Sorted, disjoint, maximal union of the given intervals."""
    items = sorted(items, key=Interval._left_key)
    out: list = []
    for iv in items:
        if out and _touches(out[-1], iv):
            prev = out[-1]
            hi, hc = _later_hi(prev, iv)
            out[-1] = Interval(prev.lo, prev.lo_closed, hi, hc)
        else:
            out.append(iv)
    return out


def term_interval(term, var: str) -> Interval | None:
    t = simplify_term(term)
    if t is None or not term_sat(t):
        return None
    lo = hi = None
    lc = hc = False
    for c in t:
        if c.variables != {var}:
            raise ContractViolation(f"decompose_1d expects a single free variable {var}")
        k = c.coeff(var)
        val = Fraction(c.bound, k)
        if c.op == "=":
            return Interval.point(val)
        strict = c.op == "<"
        if k > 0:
            if hi is None or val < hi or (val == hi and strict):
                hi, hc = val, not strict
        else:
            if lo is None or val > lo or (val == lo and strict):
                lo, lc = val, not strict
    return Interval(lo, lc, hi, hc)


def decompose_1d(f, var: str | None = None) -> list:
    """Maximal disjoint sorted intervals whose union is the solution set of ``f``."""
    d = f if isinstance(f, Dnf) else to_dnf(f)
    fv = d.variables
    if var is None:
        if len(fv) > 1:
            raise ContractViolation(f"decompose_1d expects one free variable, got {sorted(fv)}")
        var = next(iter(fv)) if fv else "t"
    elif fv - {var}:
        raise ContractViolation(f"unexpected free variables {sorted(fv - {var})}")
    pieces = []
    for t in d.terms:
        iv = term_interval(t, var)
        if iv is not None:
            pieces.append(iv)
    return merge_intervals(pieces)


def interval_formula(iv: Interval, var: str) -> Dnf:
    from .constraints import make

    cons = []
    if iv.lo is not None:
        cons.append(make({var: -1}, "<=" if iv.lo_closed else "<", -iv.lo))
    if iv.hi is not None:
        cons.append(make({var: 1}, "<=" if iv.hi_closed else "<", iv.hi))
    return Dnf.conj(cons)
