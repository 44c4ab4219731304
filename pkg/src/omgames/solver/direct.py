"""Fixpoint computed on formulas by quantifier elimination (affine-cone games)."""
from __future__ import annotations

from ..dynamics.affine import TAU, AffineCone, UnsupportedQuery
from ..logic.constraints import make
from ..logic.dnf import Dnf
from ..sets import DefSet
from .result import BackendMismatch, NoConvergence, WinningSet

TAU2 = "tau_p"
DEFAULT_CAP = 64


class DirectSolver:
    def __init__(self, game, mode: str = "partial", literal_upred: bool = False, cap: int = DEFAULT_CAP):
        if mode not in ("partial", "perfect"):
            raise ValueError(f"unknown mode {mode}")
        self.game = game
        self.mode = mode
        self.literal_upred = literal_upred
        self.cap = cap
        for q in game.locations:
            if q in game.goal:
                continue
            eng = game.dynamics[q]
            if not isinstance(eng, AffineCone):
                raise BackendMismatch(f"location {q} uses an oracle engine; use the abstract backend")
            if mode == "perfect" and not eng.deterministic:
                raise UnsupportedQuery(
                    f"perfect mode at {q}: per-trajectory delays are bilinear in (tau, d); "
                    "use the abstract backend or the perfect-to-partial transform")

    def domains(self) -> dict:
        return {q: self.game.domain(q) for q in self.game.locations}

    def _reset_inside(self, t, W: DefSet) -> bool:
        r = t.reset & self.game.domain(t.dst)
        return r.implies(W.at(t.dst))

    def _reset_meets(self, t, W: DefSet) -> bool:
        r = t.reset & self.game.domain(t.dst)
        return not r.disjoint(W.at(t.dst))

    def pred_a(self, W: DefSet, a: str) -> DefSet:
        out = {}
        for q in self.game.locations:
            ts = self.game.outgoing(q, a)
            if not ts:
                continue
            some = Dnf.false()
            spoiled = Dnf.false()
            for t in ts:
                some = some | t.guard
                if not self._reset_inside(t, W):
                    spoiled = spoiled | t.guard
            out[q] = (self.game.domain(q) & (some - spoiled)).simplify()
        return DefSet(out)

    def cpred(self, W: DefSet) -> DefSet:
        out = DefSet()
        for a in self.game.controllable:
            out = out | self.pred_a(W, a)
        return out

    def upred_unsafe(self, W: DefSet) -> DefSet:
        """States where some uncontrollable move has a successor outside ``W``."""
        out = {}
        for q in self.game.locations:
            acc = Dnf.false()
            for u in self.game.uncontrollable:
                ts = self.game.outgoing(q, u)
                if not ts:
                    continue
                if self.literal_upred:
                    some = Dnf.false()
                    spoiled = Dnf.false()
                    for t in ts:
                        some = some | t.guard
                        if self._reset_meets(t, W):
                            spoiled = spoiled | t.guard
                    acc = acc | (some - spoiled)
                else:
                    for t in ts:
                        r = t.reset & self.game.domain(t.dst)
                        if not r.implies(W.at(t.dst)):
                            acc = acc | t.guard
            out[q] = (self.game.domain(q) & acc).simplify()
        return DefSet(out)

    def timepred_partial(self, T: DefSet, bad: DefSet) -> DefSet:
        out = {}
        for q in self.game.locations:
            target = T.at(q)
            if not target.terms:
                continue
            eng = self.game.dynamics[q]
            out[q] = timepred_formula(eng, target, bad.at(q), self.game.domain(q))
        return DefSet(out)

    def pi_step(self, W: DefSet) -> DefSet:
        bad = self.upred_unsafe(W)
        acc = W
        for a in sorted(self.game.controllable):
            acc = acc | self.timepred_partial(self.pred_a(W, a), bad)
        return DefSet({q: f.simplify() for q, f in acc.parts.items() if q not in self.game.goal}) | self.goal_set()

    def goal_set(self) -> DefSet:
        return DefSet({q: self.game.domain(q) for q in self.game.goal})

    def solve(self) -> WinningSet:
        W = self.goal_set()
        layers = [W]
        for _ in range(self.cap):
            W2 = self.pi_step(W)
            if W2.equivalent(W):
                return WinningSet(self.mode, "direct", self.game, layers=layers, iterations=len(layers))
            layers.append(W2)
            W = W2
        raise NoConvergence(f"no finite convergence within {self.cap} iterations")


def timepred_formula(eng: AffineCone, target: Dnf, bad: Dnf, dom: Dnf) -> Dnf:
    """``exists tau >= 0``: every trajectory lands in ``target`` and none meets ``bad`` on [0, tau]."""
    land = eng.all_reach_formula(target)
    if bad.terms:
        hit = eng.reach_formula(bad, TAU2) & Dnf.conj([make({TAU2: -1}, "<=", 0), make({TAU2: 1, TAU: -1}, "<=", 0)])
        body = land - hit.exists([TAU2])
    else:
        body = land
    return (dom & body.exists([TAU])).simplify()
