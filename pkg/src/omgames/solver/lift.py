"""Perfect-to-partial reductions.

``formula_lift`` applies the game transform that exposes the direction in
the state (deterministic dynamics) and solves the lifted game in partial
mode with the direct backend.  ``piece_lift`` performs the same reduction on
labelled pieces: a lifted piece ``(P, w)`` follows the single word ``w``, so
its superword is ``w`` with singleton letters, and the partial-mode rule is
applied to it.  The piece-level form also covers nondeterministic cones,
whose lifted flow ``y + t*d`` is bilinear in the state.
"""
from __future__ import annotations

from ..game import perfect_to_partial_transform, project_directions
from ..logic.dnf import Dnf
from ..words import LabeledPartition, LabeledPiece, suffix_partition
from ..wordtypes import Superword
from .abstract import AbstractSolver
from .direct import DirectSolver


def formula_lift(g, cap: int = 64) -> dict:
    """Per location, the projected partial-mode winning set of the transformed game."""
    g2, _ = perfect_to_partial_transform(g)
    ws = DirectSolver(g2, "partial", cap=cap).solve()
    lifted = ws.as_defset()
    return project_directions(g, {q: lifted.at(q) for q in g.locations})


def lifted_partition(lp: LabeledPartition) -> LabeledPartition:
    out = {}
    for q, items in lp.pieces.items():
        lifted = []
        for p in items:
            for w in sorted(p.suffix, key=str):
                letters = tuple(frozenset([x]) for x in w.positions())
                lifted.append(LabeledPiece(f"{p.name}|{w}", p.base, p.formula, p.cells,
                                           frozenset([w]), Superword(letters)))
        out[q] = tuple(lifted)
    return LabeledPartition(lp.dim, "lifted", out, lp.engines)


def piece_lift(g, lp: LabeledPartition | None = None):
    """``(winning original pieces, lifted winning set)`` via the partial rule on lifted pieces."""
    lp = lp or suffix_partition(g)
    big = lifted_partition(lp)
    ws = AbstractSolver(g, "partial", lp=big).solve()
    won = set()
    for q, items in lp.pieces.items():
        for p in items:
            names = {f"{p.name}|{w}" for w in p.suffix}
            if all((q, n) in ws.pieces for n in names):
                won.add((q, p.name))
    return frozenset(won), ws


def piece_lift_defset(g, lp: LabeledPartition | None = None) -> dict:
    lp = lp or suffix_partition(g)
    won, _ = piece_lift(g, lp)
    out = {q: Dnf.false() for q in lp.pieces}
    for q, name in won:
        f = lp.piece(q, name).formula
        if f is not None:
            out[q] = out[q] | f
    return out
