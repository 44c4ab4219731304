"""Concrete plays against random or greedy environments, and strategy validation."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics.affine import EngineError, yvars
from .dynamics.oracle import OracleDynamics
from .game import ExtendedState, GameState
from .logic.intervals import Interval
from .strategy import best_effort_move, strategy_move

GREEDY_SAMPLES = 4


@dataclass
class Step:
    tau: Fraction
    action: str
    controller: bool  # False when the environment preempted


@dataclass
class Run:
    states: list = field(default_factory=list)  # ExtendedState
    labels: list = field(default_factory=list)  # (tau, action)
    steps: list = field(default_factory=list)
    outcome: str = ""
    violations: list = field(default_factory=list)

    def observation(self) -> "Observation":
        return Observation([s.observed() for s in self.states], list(self.labels))

    def controller_moves(self) -> int:
        return sum(1 for s in self.steps if s.controller)


@dataclass
class Observation:
    states: list
    labels: list


@dataclass(frozen=True)
class EnvironmentPolicy:
    kind: str = "random"  # random | greedy
    seed: int = 0


def run_rng(seed: int, index: int) -> random.Random:
    """Private reproducible stream for run ``index`` under the master ``seed``."""
    return random.Random(f"{seed}:{index}")


# ----------------------------------------------------------------- helpers

def _rank(ws, q, y):
    if ws is None:
        return None
    try:
        return ws.rank_at(q, y)
    except (EngineError, ValueError, KeyError):
        return None


def _score(ws, q, y) -> float:
    """Environment preference: losing states beat any rank, higher ranks beat lower ones."""
    r = _rank(ws, q, y)
    return float("inf") if r is None else r


def _windows(g, q, y, w) -> list:
    eng = g.dynamics[q]
    if isinstance(eng, OracleDynamics):
        return [(iv, {p}) for iv, p in eng.piece_windows(y, w)]
    d = w if w is not None else eng.point
    return eng.ray_windows(list(g.partition().pieces[q]), y, d)


def _candidate_times(iv: Interval, tau) -> list:
    """Endpoints and midpoint of ``iv`` cut to ``[0, tau]``."""
    lo = max(iv.lo, Fraction(0))
    hi = tau if iv.hi is None else min(iv.hi, tau)
    if lo > hi:
        return []
    out = []
    if iv.contains(lo):
        out.append(lo)
    if iv.contains(hi):
        out.append(hi)
    mid = (lo + hi) / 2
    if iv.contains(mid):
        out.append(mid)
    return sorted(set(out))


def preemptions(g, es: ExtendedState, tau) -> list:
    """``(tau', u)`` with ``tau' <= tau`` at which an uncontrollable move is enabled along the witness."""
    if not g.uncontrollable:
        return []
    out = []
    for iv, _ in _windows(g, es.location, es.y, es.witness):
        if iv.lo > tau:
            break
        for t in _candidate_times(iv, Fraction(tau)):
            y2 = g.advance(es.location, es.y, es.witness, t)
            for u in sorted(g.uncontrollable):
                if g.enabled_transitions(es.location, y2, u):
                    out.append((t, u))
    return sorted(set(out))


def _successors(g, tr, rng, ws, greedy: bool) -> list:
    if not greedy:
        return [g.sample_reset(tr, rng)]
    eng = g.dynamics[tr.dst]
    cands = []
    if isinstance(eng, OracleDynamics):
        for c in sorted(g.reset_cells(tr)):
            for _ in range(GREEDY_SAMPLES):
                cands.append(tuple(eng._need_model().sample(c, rng)))
        return cands
    lp = ws.lp if ws is not None and ws.lp is not None else None
    regions = [p.formula for p in lp.pieces[tr.dst]] if lp is not None else [None]
    for reg in regions:
        try:
            for _ in range(GREEDY_SAMPLES if reg is not None else 1):
                cands.append(g.sample_reset(tr, rng, reg))
        except EngineError:
            continue
    return cands or [g.sample_reset(tr, rng)]


def _pick_witness(g, q, y, rng, greedy, controller, ws):
    if not greedy:
        return g.random_witness(q, y, rng)
    cands = g.witness_candidates(q, y)
    best, best_score = None, None
    for w in cands:
        es = ExtendedState(q, y, w)
        mv = controller(es)
        if mv is None or not g.enabled(es, mv[0], mv[1]):
            return w  # the controller is stuck along this trajectory
        score = _lookahead(g, es, mv, ws)
        if best_score is None or score > best_score:
            best, best_score = w, score
    return best


def _lookahead(g, es, mv, ws) -> float:
    tau, a = mv
    scores = []
    options = [(tau, a)] + preemptions(g, es, tau)
    rng = random.Random(0)
    for t, b in options:
        y2 = g.advance(es.location, es.y, es.witness, t)
        for tr in g.enabled_transitions(es.location, y2, b):
            for s in _successors(g, tr, rng, ws, True):
                scores.append(_score(ws, tr.dst, s))
    return max(scores) if scores else float("inf")


# ----------------------------------------------------------------- play

def play(g, st, init: GameState, pol: EnvironmentPolicy, max_steps: int | None = None,
         rng: random.Random | None = None, ws=None, best_effort: bool = False) -> Run:
    """A maximal run compatible with ``st`` (or, with ``best_effort``, a fallback controller)."""
    rng = rng or random.Random(pol.seed)
    ws = ws if ws is not None else getattr(st, "ws", None)
    greedy = pol.kind == "greedy"
    if max_steps is None:
        size = ws.lp.size() if ws is not None and ws.lp is not None else g.partition().size()
        max_steps = 2 * size
    perfect = st is not None and st.mode == "perfect"

    def controller(es):
        if st is not None:
            mv = strategy_move(st, g, es)
            if mv is not None or not best_effort:
                return mv
        return best_effort_move(g, es, observe_witness=perfect)

    run = Run()
    q, y = init.location, tuple(Fraction(v) for v in init.y)
    for _ in range(max_steps + 1):
        if q in g.goal:
            run.states.append(ExtendedState(q, y))
            run.outcome = "won"
            return run
        if len(run.steps) >= max_steps:
            run.states.append(ExtendedState(q, y))
            run.outcome = "cap-exceeded"
            return run
        w = _pick_witness(g, q, y, rng, greedy, controller, ws)
        es = ExtendedState(q, y, w)
        run.states.append(es)
        mv = controller(es)
        if mv is None or not g.enabled(es, mv[0], mv[1]):
            if mv is not None and _rank(ws, q, y) is not None:
                run.violations.append(f"move {mv} not enabled at {q}:{y} along {w}")
            run.outcome = "lost-stuck"
            return run
        tau, a = mv
        pre = preemptions(g, es, tau)
        choices = [(tau, a, True)] + [(t, u, False) for t, u in pre]
        if greedy:
            opts = []
            for t, b, ctrl in choices:
                y2 = g.advance(q, y, w, t)
                for tr in g.enabled_transitions(q, y2, b):
                    for s in _successors(g, tr, rng, ws, True):
                        opts.append((_score(ws, tr.dst, s), t, b, ctrl, tr, s))
            top = max(o[0] for o in opts)
            _, t, b, ctrl, tr, s = next(o for o in opts if o[0] == top)
        else:
            t, b, ctrl = choices[0] if not pre or rng.random() < 0.5 else rng.choice(choices[1:])
            y2 = g.advance(q, y, w, t)
            tr = rng.choice(g.enabled_transitions(q, y2, b))
            s = _successors(g, tr, rng, ws, False)[0]
        k = _rank(ws, q, y)
        if st is not None and k is not None:
            k2 = _rank(ws, tr.dst, s)
            if k2 is None or k2 >= k:
                run.violations.append(f"rank {k} -> {k2} at {q}:{y} by ({t}, {b})")
        run.labels.append((t, b))
        run.steps.append(Step(t, b, ctrl))
        q, y = tr.dst, tuple(s)
    run.outcome = "cap-exceeded"
    return run


# ----------------------------------------------------------------- validation

def sample_piece(g, lp, q, piece, rng):
    eng = g.dynamics[q]
    if isinstance(eng, OracleDynamics):
        return tuple(eng._need_model().sample(rng.choice(piece.cells), rng))
    pt = (piece.formula & g.domain(q)).sample(yvars(g.dim), rng)
    return None if pt is None else tuple(pt[v] for v in yvars(g.dim))


@dataclass
class ValidationReport:
    runs: int = 0
    wins: int = 0
    losses: int = 0
    max_moves: int = 0
    violations: list = field(default_factory=list)
    losing_runs: int = 0
    env_wins: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.losses == 0 and not self.violations and self.env_wins == self.losing_runs


def validate_strategy(g, st, ws, samples: int = 100, seed: int = 0, adversaries=("random", "greedy"),
                      losing_samples: int | None = None) -> ValidationReport:
    """Play from sampled winning states (must all win) and losing states (greedy must win)."""
    rep = ValidationReport()
    winning = sorted(r for r in ws.rank if r[0] not in g.goal)
    losing = sorted((q, p.name) for q in g.locations if q not in g.goal
                    for p in ws.lp.pieces[q] if (q, p.name) not in ws.rank)
    idx = 0
    if winning:
        for i in range(samples):
            rng = run_rng(seed, idx)
            idx += 1
            q, name = winning[i % len(winning)]
            y = sample_piece(g, ws.lp, q, ws.lp.piece(q, name), rng)
            if y is None:
                continue
            kind = adversaries[i % len(adversaries)]
            run = play(g, st, GameState(q, y), EnvironmentPolicy(kind, seed), rng=rng, ws=ws)
            rep.runs += 1
            rep.max_moves = max(rep.max_moves, run.controller_moves())
            rep.violations += run.violations
            if run.outcome == "won":
                rep.wins += 1
            else:
                rep.losses += 1
                rep.failures.append((q, y, kind, run.outcome))
    n_lose = samples if losing_samples is None else losing_samples
    if losing:
        for i in range(n_lose):
            rng = run_rng(seed, idx)
            idx += 1
            q, name = losing[i % len(losing)]
            y = sample_piece(g, ws.lp, q, ws.lp.piece(q, name), rng)
            if y is None:
                continue
            run = play(g, st, GameState(q, y), EnvironmentPolicy("greedy", seed), rng=rng, ws=ws,
                       best_effort=True)
            rep.losing_runs += 1
            if run.outcome != "won":
                rep.env_wins += 1
            else:
                rep.failures.append((q, y, "greedy-from-losing", run.outcome))
    return rep
