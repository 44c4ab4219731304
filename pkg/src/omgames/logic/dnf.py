"""Disjunctive normal forms of linear constraints and Fourier-Motzkin elimination.

A :class:`Dnf` is a set of terms; a term is a frozenset of
:class:`~omgames.logic.constraints.Constraint` read as a conjunction.
Strict and non-strict bounds are carried exactly through elimination.
"""
from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from .constraints import Constraint, Lin, from_int_coeffs, negate, substitute

DNF_ATOM_CAP = 10**6


class FormulaTooLarge(RuntimeError):
    """DNF conversion would exceed the configured atom cap."""


def set_atom_cap(cap: int) -> None:
    global DNF_ATOM_CAP
    DNF_ATOM_CAP = int(cap)


# ---------------------------------------------------------------- terms

def _key(coeffs: tuple):
    """Canonical direction for a coefficient vector: first coefficient positive."""
    if coeffs[0][1] > 0:
        return coeffs, 1
    return tuple((v, -c) for v, c in coeffs), -1


def simplify_term(cons: Iterable) -> frozenset | None:
    """Merge parallel bounds; return None when the term is trivially empty.

    Booleans in ``cons`` are treated as trivially true/false atoms.
    """
    groups: dict = {}
    for c in cons:
        if c is True:
            continue
        if c is False:
            return None
        key, sign = _key(c.coeffs)
        g = groups.get(key)
        if g is None:
            g = groups[key] = [None, None, None]  # upper, lower, eq
        b = c.bound * sign
        if c.op == "=":
            if g[2] is not None and g[2] != b:
                return None
            g[2] = b
        elif sign > 0:
            strict = c.op == "<"
            cur = g[0]
            if cur is None or b < cur[0] or (b == cur[0] and strict):
                g[0] = (b, strict)
        else:
            strict = c.op == "<"
            cur = g[1]
            if cur is None or b > cur[0] or (b == cur[0] and strict):
                g[1] = (b, strict)
    out = []
    for key, (up, lo, eq) in groups.items():
        if eq is not None:
            if up is not None and (eq > up[0] or (eq == up[0] and up[1])):
                return None
            if lo is not None and (eq < lo[0] or (eq == lo[0] and lo[1])):
                return None
            out.append(Constraint(key, "=", eq))
            continue
        if up is not None and lo is not None:
            if lo[0] > up[0]:
                return None
            if lo[0] == up[0]:
                if lo[1] or up[1]:
                    return None
                out.append(Constraint(key, "=", up[0]))
                continue
        if up is not None:
            out.append(Constraint(key, "<" if up[1] else "<=", up[0]))
        if lo is not None:
            neg = tuple((v, -c) for v, c in key)
            out.append(Constraint(neg, "<" if lo[1] else "<=", -lo[0]))
    return frozenset(out)


def _term_vars(term) -> set:
    out = set()
    for c in term:
        out.update(v for v, _ in c.coeffs)
    return out


def _linear_combo(c1: Constraint, m1: int, c2: Constraint, m2: int, op: str):
    acc: dict = {}
    for v, k in c1.coeffs:
        acc[v] = m1 * k
    for v, k in c2.coeffs:
        acc[v] = acc.get(v, 0) + m2 * k
    coeffs = tuple(sorted((v, k) for v, k in acc.items() if k != 0))
    return from_int_coeffs(coeffs, op, m1 * c1.bound + m2 * c2.bound)


def eliminate_var(term: frozenset, x: str) -> frozenset | None:
    """Project ``x`` out of a simplified term (exact over ordered fields)."""
    eqs = [c for c in term if c.op == "=" and c.coeff(x) != 0]
    if eqs:
        eq = min(eqs, key=lambda c: (abs(c.coeff(x)), len(c.coeffs)))
        orig = eq
        a = eq.coeff(x)
        if a < 0:
            eq = Constraint(tuple((v, -k) for v, k in eq.coeffs), "=", -eq.bound)
            a = -a
        rest = []
        for c in term:
            if c == orig:
                continue
            k = c.coeff(x)
            if k == 0:
                rest.append(c)
                continue
            # a*c - k*eq keeps the direction of c since a > 0
            rest.append(_linear_combo(c, a, eq, -k, c.op))
        return simplify_term(rest)
    pos, neg, rest = [], [], []
    for c in term:
        k = c.coeff(x)
        if k > 0:
            pos.append((c, k))
        elif k < 0:
            neg.append((c, k))
        else:
            rest.append(c)
    for cu, ku in pos:
        for cl, kl in neg:
            op = "<" if (cu.op == "<" or cl.op == "<") else "<="
            rest.append(_linear_combo(cu, -kl, cl, ku, op))
    out = simplify_term(rest)
    if out is not None and len(out) > 12:
        out = prune_redundant(out)
    return out


def _pick_var(term, variables):
    best, score = None, None
    for x in variables:
        p = n = 0
        has_eq = False
        for c in term:
            k = c.coeff(x)
            if k > 0:
                p += 1
            elif k < 0:
                n += 1
            if k and c.op == "=":
                has_eq = True
        s = -1 if has_eq else p * n - p - n
        if score is None or s < score:
            best, score = x, s
    return best


def project_term(term: frozenset, variables: Iterable[str]) -> frozenset | None:
    todo = set(variables) & _term_vars(term)
    while todo and term is not None:
        x = _pick_var(term, sorted(todo))
        todo.discard(x)
        term = eliminate_var(term, x)
        if term is not None:
            todo &= _term_vars(term)
    return term


@lru_cache(maxsize=200_000)
def term_sat(term: frozenset) -> bool:
    t = simplify_term(term)
    if t is None:
        return False
    return project_term(t, _term_vars(t)) is not None


def prune_redundant(term: frozenset) -> frozenset:
    """Drop constraints implied by the others."""
    cons = sorted(term, key=lambda c: (len(c.coeffs), c))
    keep = list(cons)
    for c in reversed(cons):
        if c.op == "=":
            continue
        others = [k for k in keep if k != c]
        if not term_sat(frozenset(others) | frozenset(negate(c))):
            keep = others
    return frozenset(keep)


def _pick_value(lo, up, rng):
    """A rational inside the described interval; ``lo``/``up`` are (value, strict) or None."""
    if lo is not None and up is not None:
        if lo[0] == up[0]:
            return lo[0]
        if rng is None:
            return (lo[0] + up[0]) / 2
        r = Fraction(rng.randint(1, 999), 1000)
        return lo[0] + (up[0] - lo[0]) * r
    if lo is not None:
        return lo[0] + (1 if rng is None else Fraction(rng.randint(1, 4000), 1000))
    if up is not None:
        return up[0] - (1 if rng is None else Fraction(rng.randint(1, 4000), 1000))
    return Fraction(0) if rng is None else Fraction(rng.randint(-4000, 4000), 1000)


def _bounds_1d(term, x):
    lo = up = None
    for c in term:
        k = c.coeff(x)
        val = Fraction(c.bound, k)
        if c.op == "=":
            return (val, False), (val, False)
        strict = c.op == "<"
        if k > 0:
            if up is None or val < up[0] or (val == up[0] and strict):
                up = (val, strict)
        else:
            if lo is None or val > lo[0] or (val == lo[0] and strict):
                lo = (val, strict)
    return lo, up


def sample_term(term: frozenset, variables: Iterable[str] = (), rng: random.Random | None = None):
    """A rational point satisfying ``term`` (None when unsatisfiable).

    Without ``rng`` the point is the deterministic "centre" choice.
    """
    t = simplify_term(term)
    if t is None:
        return None
    order = sorted(set(variables) | _term_vars(t))
    chain = [t]
    for i in range(len(order) - 1, 0, -1):
        nxt = eliminate_var(chain[-1], order[i])
        if nxt is None:
            return None
        chain.append(nxt)
    chain.reverse()
    point: dict = {}
    for i, x in enumerate(order):
        cur = chain[i]
        if point:
            fixed = {v: Lin({}, val) for v, val in point.items()}
            cur = simplify_term(substitute(c, fixed) for c in cur)
            if cur is None:
                return None
        lo, up = _bounds_1d(cur, x)
        if lo is not None and up is not None and (lo[0] > up[0] or (lo[0] == up[0] and (lo[1] or up[1]))):
            return None
        point[x] = Fraction(_pick_value(lo, up, rng))
    return point


# ---------------------------------------------------------------- Dnf

class Dnf:
    """Immutable disjunction of conjunctive terms."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable = ()):
        cleaned = set()
        for t in terms:
            s = simplify_term(t)
            if s is not None:
                cleaned.add(s)
        if frozenset() in cleaned:
            cleaned = {frozenset()}
        object.__setattr__(self, "terms", frozenset(cleaned))

    def __setattr__(self, *_):
        raise AttributeError("Dnf is immutable")

    @classmethod
    def true(cls) -> "Dnf":
        return cls([frozenset()])

    @classmethod
    def false(cls) -> "Dnf":
        return cls([])

    @classmethod
    def atom(cls, c) -> "Dnf":
        if c is True:
            return cls.true()
        if c is False:
            return cls.false()
        return cls([frozenset([c])])

    @classmethod
    def conj(cls, cons: Iterable) -> "Dnf":
        return cls([frozenset(c for c in cons if c is not True)] if False not in cons else [])

    def __eq__(self, other):
        return isinstance(other, Dnf) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        from .syntax import format_dnf

        return f"Dnf({format_dnf(self)})"

    @property
    def variables(self) -> frozenset:
        out = set()
        for t in self.terms:
            out |= _term_vars(t)
        return frozenset(out)

    def is_true_syntactic(self) -> bool:
        return frozenset() in self.terms

    def atom_count(self) -> int:
        return sum(len(t) for t in self.terms)

    # boolean structure
    def __or__(self, other: "Dnf") -> "Dnf":
        return Dnf(self.terms | other.terms)

    def __and__(self, other: "Dnf") -> "Dnf":
        if not self.terms or not other.terms:
            return Dnf.false()
        if self.is_true_syntactic():
            return other
        if other.is_true_syntactic():
            return self
        out = []
        size = 0
        for a in self.terms:
            for b in other.terms:
                t = simplify_term(a | b)
                if t is None or not term_sat(t):
                    continue
                out.append(t)
                size += len(t)
                if size > DNF_ATOM_CAP:
                    raise FormulaTooLarge(f"DNF exceeds {DNF_ATOM_CAP} atoms")
        return Dnf(out)._absorb()

    def __invert__(self) -> "Dnf":
        acc = [frozenset()]
        for t in sorted(self.terms, key=len):
            options = [n for c in t for n in negate(c)]
            nxt = []
            size = 0
            for a in acc:
                for n in options:
                    s = simplify_term(a | {n})
                    if s is None or not term_sat(s):
                        continue
                    nxt.append(s)
                    size += len(s)
                    if size > DNF_ATOM_CAP:
                        raise FormulaTooLarge(f"DNF exceeds {DNF_ATOM_CAP} atoms")
            acc = list(Dnf(nxt)._absorb().terms)
            if not acc:
                break
        return Dnf(acc)

    def __sub__(self, other: "Dnf") -> "Dnf":
        return self & ~other

    def _absorb(self) -> "Dnf":
        """Drop terms whose constraint set syntactically contains another term's."""
        ts = sorted(self.terms, key=len)
        keep: list = []
        for t in ts:
            if not any(k <= t for k in keep):
                keep.append(t)
        return Dnf(keep)

    # quantifiers
    def exists(self, variables: Iterable[str]) -> "Dnf":
        vs = list(variables)
        out = []
        for t in self.terms:
            p = project_term(t, vs)
            if p is not None:
                out.append(p)
        return Dnf(out)._absorb()

    def forall(self, variables: Iterable[str]) -> "Dnf":
        return ~((~self).exists(variables))

    # evaluation
    def substitute(self, mapping: Mapping[str, Lin]) -> "Dnf":
        return Dnf(frozenset(substitute(c, mapping) for c in t) for t in self.terms)

    def rename(self, mapping: Mapping[str, str]) -> "Dnf":
        return self.substitute({a: Lin.var(b) for a, b in mapping.items()})

    def holds(self, point: Mapping) -> bool:
        return any(all(c.holds(point) for c in t) for t in self.terms)

    def is_sat(self) -> bool:
        return any(term_sat(t) for t in self.terms)

    def implies(self, other: "Dnf") -> bool:
        # term by term: t & ~s1 & ~s2 ... is refined one term of ``other`` at a time
        for t in self.terms:
            if not term_sat(t) or any(s <= t for s in other.terms):
                continue
            acc = [t]
            for s in other.terms:
                options = [n for c in s for n in negate(c)]
                if not options:
                    acc = []
                    break
                nxt = []
                for a in acc:
                    if not term_sat(a | s):
                        nxt.append(a)  # a already avoids s
                        continue
                    for n in options:
                        u = simplify_term(a | {n})
                        if u is not None and term_sat(u):
                            nxt.append(u)
                acc = list(Dnf(nxt)._absorb().terms)
                if not acc:
                    break
            if acc:
                return False
        return True

    def equivalent(self, other: "Dnf") -> bool:
        return self.implies(other) and other.implies(self)

    def disjoint(self, other: "Dnf") -> bool:
        return not (self & other).is_sat()

    def simplify(self) -> "Dnf":
        """Drop empty terms and redundant constraints (semantics preserved)."""
        terms = [prune_redundant(t) for t in self.terms if term_sat(t)]
        return Dnf(terms)._absorb()

    def sample(self, variables: Iterable[str] = (), rng: random.Random | None = None):
        terms = sorted((t for t in self.terms if term_sat(t)), key=lambda t: (len(t), sorted(t)))
        if not terms:
            return None
        t = terms[0] if rng is None else rng.choice(terms)
        return sample_term(t, variables, rng)
