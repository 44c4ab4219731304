"""Memoryless strategies read off the abstract fixpoint.

At a winning piece of rank k the fixpoint witness names an action ``a`` and
the tables of the lower layer ``W_{<k}``: ``good`` (pieces of ``Pred_a``) and
``bad`` (pieces where the environment can escape).  At a concrete state the
safe time set ``Time(y)`` is the set of delays that land in ``good`` before
meeting ``bad``; the delay comes from its leftmost interval.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics.affine import EngineError
from .dynamics.oracle import OracleDynamics, _collapse
from .game import ExtendedState
from .logic.intervals import Interval
from .logic.syntax import format_rational
from .solver import AbstractSolver
from .solver.result import SolverError


class StrategyError(RuntimeError):
    pass


@dataclass(frozen=True)
class Entry:
    action: str
    position: int
    target: frozenset  # base pieces where the action leads into W_{<k}
    avoid: frozenset   # base pieces where an uncontrollable move escapes W_{<k}


@dataclass
class MemorylessStrategy:
    mode: str
    game: object = field(repr=False)
    ws: object = field(repr=False)
    entries: dict = field(default_factory=dict)  # (q, piece) -> Entry | {word: Entry}

    def entry(self, q: str, piece: str):
        return self.entries.get((q, piece))


def delay_rule(iv: Interval) -> tuple:
    """The delay chosen from the leftmost safe interval, with the name of the rule used."""
    if iv.has_min():
        return iv.lo, "min"
    if iv.hi is not None:
        return (iv.lo + iv.hi) / 2, "midpoint"
    return iv.lo + 1, "inf-plus-one"


def synthesize(g, mode: str, ws) -> MemorylessStrategy:
    if ws.backend != "abstract":
        raise StrategyError("synthesis requires abstract backend")
    if ws.mode != mode:
        raise StrategyError(f"winning set was computed in {ws.mode} mode")
    solver = AbstractSolver(g, mode, lp=ws.lp)
    entries = {}
    for (q, name), k in sorted(ws.rank.items()):
        if k == 0:
            continue
        lower = frozenset(r for r, j in ws.rank.items() if j < k)
        good, bad = solver.tables(lower, q)
        wit = solver.piece_witness(lower, q, ws.lp.piece(q, name), (good, bad))
        if wit is None:
            raise SolverError(f"piece {q}:{name} has rank {k} but no witness against the lower layer")
        if isinstance(wit, dict):
            entries[(q, name)] = {w: Entry(a, l, good[a], bad) for w, (a, l) in wit.items()}
        else:
            a, l = wit
            entries[(q, name)] = Entry(a, l, good[a], bad)
    return MemorylessStrategy(mode, g, ws, entries)


def _base_pieces(g, q):
    return list(g.partition().pieces[q])


def safe_times(g, q: str, y, target, avoid, witness=None) -> list:
    """Safe delay intervals at ``(q, y)``; ``witness`` restricts to one trajectory."""
    eng = g.dynamics[q]
    if isinstance(eng, OracleDynamics):
        return eng.safe_intervals(y, target, avoid, witness=witness)
    return eng.safe_intervals(_base_pieces(g, q), y, target, avoid, direction=witness)


def trajectory_word(g, q: str, y, witness):
    eng = g.dynamics[q]
    if isinstance(eng, OracleDynamics):
        return _collapse([p for _, p in eng.piece_windows(y, witness)])
    d = witness if witness is not None else eng.point
    return eng.trajectory_word(_base_pieces(g, q), y, d)[0]


def _observed_witness(g, es: ExtendedState):
    if es.witness is not None:
        return es.witness
    eng = g.dynamics[es.location]
    if isinstance(eng, OracleDynamics):
        ws = eng._need_model().witnesses(es.y)
        if len(ws) == 1:
            return ws[0]
        raise StrategyError("perfect-mode play needs the trajectory witness")
    if eng.point is None:
        raise StrategyError("perfect-mode play needs the trajectory witness")
    return eng.point


def resolve(st: MemorylessStrategy, es: ExtendedState):
    """``(entry, witness used)`` for a winning non-goal state, else ``None``."""
    g = st.game
    if es.location in g.goal:
        return None
    piece = st.ws.lp.classify(es.location, es.y)
    e = st.entry(es.location, piece.name)
    if e is None:
        return None
    if st.mode == "partial":
        return e, None
    w = _observed_witness(g, es)
    word = trajectory_word(g, es.location, es.y, w)
    if word in e:
        return e[word], w
    for lab in sorted(e, key=str):
        if _matches(lab, word):
            return e[lab], w
    raise StrategyError(f"trajectory word {word} is not in the label of {es.location}:{piece.name}")


def _matches(label, word) -> bool:
    """Whether a horizon-truncated trajectory word is a prefix of the periodic ``label``."""
    if not label.cycle:
        return False
    seq = list(word.positions())
    unrolled = list(label.letters)
    while len(unrolled) < len(seq):
        unrolled += list(label.cycle)
    return unrolled[:len(seq)] == seq


def strategy_move(st: MemorylessStrategy, g, es: ExtendedState):
    """``(tau, action)`` or ``None`` on Goal and losing states."""
    r = resolve(st, es)
    if r is None:
        return None
    e, w = r
    ivs = safe_times(g, es.location, es.y, e.target, e.avoid, witness=w)
    if not ivs:
        raise StrategyError(f"empty safe time set at winning state {es.location}:{tuple(es.y)}")
    tau, _ = delay_rule(ivs[0])
    return tau, e.action


def explain_move(st: MemorylessStrategy, g, es: ExtendedState):
    """The move with its rule and safe set, for reports."""
    r = resolve(st, es)
    if r is None:
        return None
    e, w = r
    ivs = safe_times(g, es.location, es.y, e.target, e.avoid, witness=w)
    tau, rule = delay_rule(ivs[0])
    return {"tau": tau, "action": e.action, "rule": rule, "time": ivs}


def best_effort_move(g, es: ExtendedState, observe_witness: bool):
    """A controller move at a losing state: the first action whose guard can be reached.

    Used to give the environment an opponent from losing states.
    """
    q = es.location
    if q in g.goal:
        return None
    base = g.partition()
    for a in sorted(g.controllable):
        target = set()
        for t in g.outgoing(q, a):
            eng = g.dynamics[q]
            if isinstance(eng, OracleDynamics):
                target |= {p for p in eng.pieces if set(eng.groups[p]) <= g.guard_cells(t)}
            else:
                dom = g.domain(q)
                target |= {n for n, f in base.pieces[q] if (f & dom).implies(t.guard)}
        if not target:
            continue
        try:
            ivs = safe_times(g, q, es.y, target, (), witness=es.witness if observe_witness else None)
        except EngineError:
            continue
        if ivs:
            return delay_rule(ivs[0])[0], a
    return None


def format_strategy(st: MemorylessStrategy) -> str:
    def set_text(s):
        return "{" + ",".join(sorted(s)) + "}"

    lines = [f"strategy mode={st.mode}"]
    for (q, name), e in sorted(st.entries.items()):
        rank = st.ws.rank[(q, name)]
        if isinstance(e, Entry):
            e = {None: e}
        for w, x in sorted(e.items(), key=lambda kv: str(kv[0])):
            on = "" if w is None else f" on {w}"
            lines.append(f"{q}:{name}{on} (rank {rank}) -> action {x.action}, position {x.position}, "
                         f"target {set_text(x.target)}, avoid {set_text(x.avoid)}, delay leftmost(Time)")
    return "\n".join(lines)


def format_move(move) -> str:
    if move is None:
        return "none"
    tau, a = move
    return f"({format_rational(Fraction(tau))}, {a})"
