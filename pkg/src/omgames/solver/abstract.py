"""Piece-level fixpoint on word-labelled partitions.

Every labelled piece refines a base piece of P_A.  Because resets are
strong and P_A respects the guards, ``Pred_a(W)`` and ``uPred(~W)`` are
unions of base pieces, so one fixpoint step only inspects the letters of
each piece's words.
"""
from __future__ import annotations

from ..dynamics.oracle import OracleDynamics
from ..words import LabeledPartition, suffix_partition, superword_partition
from .result import SolverError, WinningSet


class AbstractGame:
    """Guard and successor tables of a game over a labelled partition."""

    def __init__(self, game, lp: LabeledPartition):
        self.game = game
        self.lp = lp
        base = game.partition()
        self.base_names = {q: [n for n, _ in base.pieces[q]] for q in game.locations}
        self.enabled = {}   # transition index -> base pieces of src inside the guard
        self.succ = {}      # transition index -> labelled pieces at dst meeting the reset
        for i, t in enumerate(game.transitions):
            self.enabled[i] = self._guard_pieces(t, base)
            self.succ[i] = self._reset_pieces(t)

    def _guard_pieces(self, t, base) -> frozenset:
        eng = self.game.dynamics[t.src]
        out = set()
        if isinstance(eng, OracleDynamics):
            cells = self.game.guard_cells(t)
            for p in eng.pieces:
                if set(eng.groups[p]) <= cells:
                    out.add(p)
            return frozenset(out)
        dom = self.game.domain(t.src)
        for name, f in base.pieces[t.src]:
            g = f & dom
            if g.implies(t.guard):
                out.add(name)
            elif not g.disjoint(t.guard):
                raise SolverError(f"base piece {name} of {t.src} is split by a guard")
        return frozenset(out)

    def _reset_pieces(self, t) -> frozenset:
        eng = self.game.dynamics[t.dst]
        items = self.lp.pieces[t.dst]
        if isinstance(eng, OracleDynamics):
            cells = self.game.reset_cells(t)
            return frozenset((t.dst, p.name) for p in items if set(p.cells) & cells)
        r = t.reset & self.game.domain(t.dst)
        return frozenset((t.dst, p.name) for p in items if (p.formula & r).is_sat())

    # -- predecessor operators on base pieces -----------------------------
    def pred(self, W: frozenset, q: str, a: str) -> frozenset:
        """Base pieces where ``a`` is enabled and every ``a``-successor lies in ``W``."""
        out = set()
        idx = [i for i, t in enumerate(self.game.transitions) if t.src == q and t.action == a]
        for p in self.base_names[q]:
            en = [i for i in idx if p in self.enabled[i]]
            if en and all(self.succ[i] <= W for i in en):
                out.add(p)
        return frozenset(out)

    def upred(self, W: frozenset, q: str, literal: bool = False) -> frozenset:
        """Base pieces where some uncontrollable move can leave ``W``.

        ``literal`` applies the plain Pred_u to the complement instead: every
        enabled ``u``-transition must lead outside ``W`` only.
        """
        out = set()
        for u in self.game.uncontrollable:
            idx = [i for i, t in enumerate(self.game.transitions) if t.src == q and t.action == u]
            for p in self.base_names[q]:
                en = [i for i in idx if p in self.enabled[i]]
                if not en:
                    continue
                if literal:
                    if all(not (self.succ[i] & W) for i in en):
                        out.add(p)
                elif any(self.succ[i] - W for i in en):
                    out.add(p)
        return frozenset(out)


def _safe_prefix(letters, good: frozenset, bad: frozenset, partial: bool):
    """Smallest 1-based position l whose letter is good with a bad-free prefix."""
    for l, s in enumerate(letters, start=1):
        s = s if partial else frozenset([s])
        if s & bad:
            return None
        if s <= good:
            return l
    return None


class AbstractSolver:
    def __init__(self, game, mode: str = "partial", literal_upred: bool = False,
                 paper_timepred_perfect: bool = False, lp: LabeledPartition | None = None):
        if mode not in ("partial", "perfect"):
            raise ValueError(f"unknown mode {mode}")
        self.game = game
        self.mode = mode
        self.literal_upred = literal_upred
        self.existential_perfect = paper_timepred_perfect
        if lp is None:
            lp = superword_partition(game) if mode == "partial" else suffix_partition(game)
        self.lp = lp
        self.ag = AbstractGame(game, lp)

    def initial(self) -> frozenset:
        return frozenset((q, p.name) for q in self.game.goal for p in self.lp.pieces[q])

    def tables(self, W: frozenset, q: str):
        good = {a: self.ag.pred(W, q, a) for a in sorted(self.game.controllable)}
        bad = self.ag.upred(W, q, self.literal_upred)
        return good, bad

    def piece_witness(self, W: frozenset, q: str, piece, tables=None):
        """How ``piece`` enters pi(W): ``(action, position)`` or, in perfect
        mode, a dict word -> ``(action, position)``; ``None`` if it does not."""
        good, bad = tables or self.tables(W, q)
        if self.mode == "partial":
            sw = piece.superword
            if sw is None:
                raise SolverError(f"piece {piece.name} has no superword label")
            for a in sorted(good):
                l = _safe_prefix(sw.letters, good[a], bad, True)
                if l is not None:
                    return (a, l)
            return None
        words = piece.suffix
        if words is None:
            raise SolverError(f"piece {piece.name} has no suffix label")
        choice = {}
        for w in sorted(words, key=str):
            for a in sorted(good):
                l = _safe_prefix(w.positions(), good[a], bad, False)
                if l is not None:
                    choice[w] = (a, l)
                    break
        if self.existential_perfect:
            return choice or None
        return choice if len(choice) == len(words) else None

    def step(self, W: frozenset) -> tuple:
        new, wit = set(), {}
        for q in self.game.locations:
            if q in self.game.goal:
                continue
            tabs = self.tables(W, q)
            for p in self.lp.pieces[q]:
                if (q, p.name) in W:
                    continue
                w = self.piece_witness(W, q, p, tabs)
                if w is not None:
                    new.add((q, p.name))
                    wit[(q, p.name)] = w
        return W | new, wit

    def solve(self) -> WinningSet:
        W = self.initial()
        rank = {r: 0 for r in W}
        witnesses = {}
        bound = self.lp.size() + 1
        k = 0
        while True:
            k += 1
            W2, wit = self.step(W)
            if W2 == W:
                break
            for r in W2 - W:
                rank[r] = k
            witnesses.update(wit)
            W = W2
            if k > bound:
                raise SolverError("abstract fixpoint exceeded the piece count (engine bug)")
        return WinningSet(self.mode, "abstract", self.game, frozenset(W), rank, [], self.lp, witnesses, k)
