"""Winning sets returned by both backends."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..logic.dnf import Dnf
from ..sets import DefSet, point_map


class SolverError(RuntimeError):
    pass


class NoConvergence(SolverError):
    """The direct fixpoint did not stabilise within the iteration cap."""


class BackendMismatch(SolverError):
    pass


@dataclass
class WinningSet:
    mode: str
    backend: str
    game: object = field(repr=False)
    pieces: frozenset = frozenset()
    rank: dict = field(default_factory=dict)
    layers: list = field(default_factory=list)
    lp: object = field(default=None, repr=False)
    witnesses: dict = field(default_factory=dict, repr=False)
    iterations: int = 0

    # -- membership ---------------------------------------------------------
    def piece_of(self, q: str, y):
        return self.lp.classify(q, y)

    def rank_at(self, q: str, y):
        """Rank of the state, or ``None`` when it is losing."""
        if self.backend == "abstract":
            p = self.piece_of(q, y)
            return self.rank.get((q, p.name))
        pt = point_map(y)
        for k, layer in enumerate(self.layers):
            if layer.at(q).holds(pt):
                return k
        return None

    def contains(self, q: str, y) -> bool:
        return self.rank_at(q, y) is not None

    def as_defset(self) -> DefSet:
        """The winning region as formulas (affine locations only for the abstract backend)."""
        if self.backend == "direct":
            return self.layers[-1] if self.layers else DefSet()
        parts: dict = {}
        for q, name in self.pieces:
            p = self.lp.piece(q, name)
            if p.formula is None:
                continue
            parts[q] = parts.get(q, Dnf.false()) | p.formula
        return DefSet(parts)

    def losing_defset(self) -> DefSet:
        parts: dict = {}
        for q, items in self.lp.pieces.items():
            for p in items:
                if (q, p.name) not in self.pieces and p.formula is not None:
                    parts[q] = parts.get(q, Dnf.false()) | p.formula
        return DefSet(parts)

    def max_rank(self) -> int:
        if self.backend == "abstract":
            return max(self.rank.values(), default=0)
        return len(self.layers) - 1
