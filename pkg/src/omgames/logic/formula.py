"""First-order linear formulas, quantifier elimination and decision."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from .constraints import Constraint
from .dnf import Dnf


class ContractViolation(ValueError):
    """An operation was called outside its precondition."""


class Formula:
    """Base class of the immutable formula tree."""

    def free_vars(self) -> frozenset:
        raise NotImplementedError

    def __and__(self, other):
        return And((self, other))

    def __or__(self, other):
        return Or((self, other))

    def __invert__(self):
        return Not(self)

    def __str__(self):
        from .syntax import format_formula

        return format_formula(self)


@dataclass(frozen=True)
class Atom(Formula):
    value: object  # Constraint or bool

    def free_vars(self):
        return frozenset() if isinstance(self.value, bool) else self.value.variables


@dataclass(frozen=True)
class And(Formula):
    args: Tuple[Formula, ...]

    def free_vars(self):
        return frozenset().union(*(a.free_vars() for a in self.args))


@dataclass(frozen=True)
class Or(Formula):
    args: Tuple[Formula, ...]

    def free_vars(self):
        return frozenset().union(*(a.free_vars() for a in self.args))


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def free_vars(self):
        return self.arg.free_vars()


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def free_vars(self):
        return self.body.free_vars() - {self.var}


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula

    def free_vars(self):
        return self.body.free_vars() - {self.var}


TRUE = Atom(True)
FALSE = Atom(False)


def to_dnf(f: Formula) -> Dnf:
    """Quantifier-free DNF of ``f``; quantifiers are eliminated innermost first."""
    if isinstance(f, Atom):
        return Dnf.atom(f.value)
    if isinstance(f, And):
        out = Dnf.true()
        for a in f.args:
            out = out & to_dnf(a)
        return out
    if isinstance(f, Or):
        out = Dnf.false()
        for a in f.args:
            out = out | to_dnf(a)
        return out
    if isinstance(f, Not):
        return ~to_dnf(f.arg)
    if isinstance(f, Exists):
        return to_dnf(f.body).exists([f.var])
    if isinstance(f, Forall):
        return to_dnf(f.body).forall([f.var])
    if isinstance(f, Dnf):
        return f
    raise TypeError(f"not a formula: {f!r}")


def from_dnf(d: Dnf) -> Formula:
    terms = sorted(d.terms, key=lambda t: sorted(t))
    if not terms:
        return FALSE
    disj = []
    for t in terms:
        atoms = tuple(Atom(c) for c in sorted(t))
        disj.append(atoms[0] if len(atoms) == 1 else (And(atoms) if atoms else TRUE))
    return disj[0] if len(disj) == 1 else Or(tuple(disj))


def qe_eliminate(f: Formula) -> Formula:
    """An equivalent quantifier-free formula over the free variables of ``f``."""
    return from_dnf(to_dnf(f).simplify())


def decide(f: Formula) -> bool:
    free = f.free_vars()
    if free:
        raise ContractViolation(f"decide needs a closed formula; free: {sorted(free)}")
    return to_dnf(f).is_sat()


def is_equivalent(f: Formula, g: Formula) -> bool:
    ff, gf = f.free_vars(), g.free_vars()
    # a vacuous variable may vanish (e.g. after QE), so nested sets are accepted
    if not (ff <= gf or gf <= ff):
        raise ContractViolation("is_equivalent needs equal free-variable sets")
    return to_dnf(f).equivalent(to_dnf(g))


def atom(c: Constraint | bool) -> Formula:
    return Atom(c)
