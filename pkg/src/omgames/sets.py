"""Location-indexed definable sets and finite named partitions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

from .logic.dnf import Dnf


def state_vars(n: int) -> list:
    return [f"y{i + 1}" for i in range(n)]


def point_map(y, n: int | None = None) -> dict:
    """Map a coordinate tuple to the state variable names."""
    if isinstance(y, Mapping):
        return dict(y)
    return {f"y{i + 1}": v for i, v in enumerate(y)}


class PieceRef(NamedTuple):
    location: str
    piece: str

    def __str__(self):
        return f"{self.location}:{self.piece}"


class DefSet:
    """Per-location quantifier-free sets; a missing location is empty."""

    __slots__ = ("parts",)

    def __init__(self, parts: Mapping[str, Dnf] | None = None):
        clean = {}
        for q, f in (parts or {}).items():
            if f.terms:
                clean[q] = f
        object.__setattr__(self, "parts", clean)

    def __setattr__(self, *_):
        raise AttributeError("DefSet is immutable")

    def at(self, q: str) -> Dnf:
        return self.parts.get(q, Dnf.false())

    def locations(self):
        return sorted(self.parts)

    def union(self, other: "DefSet") -> "DefSet":
        keys = set(self.parts) | set(other.parts)
        return DefSet({q: self.at(q) | other.at(q) for q in keys})

    __or__ = union

    def intersect(self, other: "DefSet") -> "DefSet":
        keys = set(self.parts) & set(other.parts)
        return DefSet({q: self.at(q) & other.at(q) for q in keys})

    __and__ = intersect

    def complement(self, domains: Mapping[str, Dnf]) -> "DefSet":
        return DefSet({q: dom - self.at(q) for q, dom in domains.items()})

    def minus(self, other: "DefSet") -> "DefSet":
        return DefSet({q: f - other.at(q) for q, f in self.parts.items()})

    def contains(self, q: str, y) -> bool:
        return self.at(q).holds(point_map(y))

    def is_empty(self) -> bool:
        return not any(f.is_sat() for f in self.parts.values())

    def subset_of(self, other: "DefSet") -> bool:
        return all(f.implies(other.at(q)) for q, f in self.parts.items())

    def equivalent(self, other: "DefSet") -> bool:
        return self.subset_of(other) and other.subset_of(self)

    def simplify(self) -> "DefSet":
        return DefSet({q: f.simplify() for q, f in self.parts.items()})

    def __repr__(self):
        from .logic.syntax import format_dnf

        inner = ", ".join(f"{q}: {format_dnf(f)}" for q, f in sorted(self.parts.items()))
        return f"DefSet({inner})"


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Per location, an ordered list of (name, formula) pieces."""

    dim: int
    pieces: Mapping[str, tuple] = field(default_factory=dict)

    def names(self, q: str) -> list:
        return [n for n, _ in self.pieces[q]]

    def formula(self, q: str, name: str) -> Dnf:
        for n, f in self.pieces[q]:
            if n == name:
                return f
        raise KeyError(f"no piece {name} at {q}")

    def refs(self) -> list:
        return [PieceRef(q, n) for q in self.pieces for n, _ in self.pieces[q]]

    def classify(self, q: str, y) -> PieceRef:
        pt = point_map(y)
        for n, f in self.pieces[q]:
            if f.holds(pt):
                return PieceRef(q, n)
        raise PartitionError(f"point {y} at {q} lies in no piece")

    def size(self) -> int:
        return sum(len(v) for v in self.pieces.values())


def check_well_formed(p: Partition, domains: Mapping[str, Dnf]) -> list:
    """Diagnostics for overlapping, missing or empty pieces (decided exactly)."""
    problems = []
    for q, items in p.pieces.items():
        names = [n for n, _ in items]
        if len(set(names)) != len(names):
            problems.append(f"{q}: duplicate piece names")
        dom = domains.get(q, Dnf.true())
        union = Dnf.false()
        for i, (n, f) in enumerate(items):
            if not (f & dom).is_sat():
                problems.append(f"{q}: piece {n} is empty")
            for m, g in items[i + 1:]:
                if not f.disjoint(g & dom):
                    problems.append(f"{q}: pieces {n} and {m} overlap")
            union = union | f
        if not dom.implies(union):
            problems.append(f"{q}: pieces do not cover the location")
    return problems


def check_respects(p: Partition, s: DefSet) -> bool:
    for q, items in p.pieces.items():
        target = s.at(q)
        for _, f in items:
            if (f & target).is_sat() and not f.implies(target):
                return False
    return True


def split_cells(cells: list, cut: Dnf) -> list:
    """Split (signature, formula) cells by ``cut``; empty halves are dropped."""
    out = []
    neg = ~cut
    for sig, f in cells:
        inside = f & cut
        outside = f & neg
        if inside.is_sat():
            out.append((sig + "1", inside))
        if outside.is_sat():
            out.append((sig + "0", outside))
    return out


def refine(p: Partition, cuts: Iterable[DefSet]) -> Partition:
    """Coarsest common refinement of ``p`` and the cut sets.

    Piece names are the original name followed by the sign vector over cuts
    that actually split the piece.
    """
    cuts = list(cuts)
    out = {}
    for q, items in p.pieces.items():
        new = []
        for name, f in items:
            cells = [("", f)]
            for cut in cuts:
                c = cut.at(q)
                cells = split_cells(cells, c)
            if len(cells) == 1:
                new.append((name, cells[0][1]))
                continue
            # keep only the positions that distinguish cells
            sigs = [s for s, _ in cells]
            keep = [i for i in range(len(cuts)) if len({s[i] for s in sigs}) > 1]
            for s, g in cells:
                new.append((name + "_" + "".join(s[i] for i in keep), g))
        out[q] = tuple(new)
    return Partition(p.dim, out)
