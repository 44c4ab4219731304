"""Finite reachability games: attractor, bisimulation quotient, reference oracles."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product


@dataclass
class FiniteGame:
    states: list
    goal: set
    controllable: set
    uncontrollable: set
    edges: list = field(default_factory=list)  # (src, action, dst)

    def __post_init__(self):
        if set(self.controllable) & set(self.uncontrollable):
            raise ValueError("actions must be split into disjoint controllable and uncontrollable sets")

    def succ(self, s, a) -> set:
        return {d for (x, b, d) in self.edges if x == s and b == a}

    def enabled(self, s) -> set:
        return {b for (x, b, _) in self.edges if x == s}

    def u_succ(self, s) -> set:
        return {d for (x, b, d) in self.edges if x == s and b in self.uncontrollable}


def finite_attractor(fg: FiniteGame):
    """Least fixpoint of ``W | (Pred_c(W) - uPred(~W))`` with ranks."""
    W = set(fg.goal)
    rank = {s: 0 for s in W}
    k = 0
    while True:
        k += 1
        new = set()
        for s in fg.states:
            if s in W:
                continue
            if fg.u_succ(s) - W:
                continue
            for c in sorted(fg.controllable & fg.enabled(s)):
                if fg.succ(s, c) <= W:
                    new.add(s)
                    break
        if not new:
            return W, rank
        for s in new:
            rank[s] = k
        W |= new


def attractor_strategy(fg: FiniteGame, rank: dict) -> dict:
    strat = {}
    for s, k in rank.items():
        if k == 0:
            continue
        lower = {t for t, j in rank.items() if j < k}
        for c in sorted(fg.controllable & fg.enabled(s)):
            if fg.succ(s, c) <= lower:
                strat[s] = c
                break
    return strat


def trap_oracle(fg: FiniteGame) -> set:
    """Winning states as the complement of the environment's greatest trap.

    A non-goal state stays in the trap while every controllable proposal
    has some successor (by that action or by an uncontrollable one) still
    in the trap; states with no proposal at all are trapped.
    """
    trap = set(fg.states) - set(fg.goal)
    changed = True
    while changed:
        changed = False
        for s in list(trap):
            cs = fg.controllable & fg.enabled(s)
            held = not cs or all((fg.succ(s, c) | fg.u_succ(s)) & trap for c in cs)
            if not held:
                trap.discard(s)
                changed = True
    return set(fg.states) - trap


def strategy_wins(fg: FiniteGame, strat: dict, s0) -> bool:
    """Every maximal run from ``s0`` compatible with the memoryless ``strat`` hits Goal."""
    colour: dict = {}

    def visit(s) -> bool:
        if s in fg.goal:
            return True
        if colour.get(s) == 1:
            return False  # a cycle avoiding Goal
        if colour.get(s) == 2:
            return True
        c = strat.get(s)
        if c is None:
            return False
        colour[s] = 1
        for t in fg.succ(s, c) | fg.u_succ(s):
            if not visit(t):
                return False
        colour[s] = 2
        return True

    return visit(s0)


def brute_force_winning(fg: FiniteGame) -> set:
    """Enumerate memoryless strategies (small games only)."""
    choices = []
    for s in fg.states:
        opts = sorted(fg.controllable & fg.enabled(s))
        choices.append([None] + opts if s not in fg.goal else [None])
    won = set(fg.goal)
    for combo in product(*choices):
        strat = {s: c for s, c in zip(fg.states, combo) if c is not None}
        for s in fg.states:
            if s not in won and strategy_wins(fg, strat, s):
                won.add(s)
    return won


def coarsest_bisimulation(fg: FiniteGame, initial=None) -> list:
    """Signature refinement starting from ``initial`` (default: Goal / non-Goal)."""
    if initial is None:
        initial = [set(fg.goal), set(fg.states) - set(fg.goal)]
    blocks = [frozenset(b) for b in initial if b]
    actions = sorted(fg.controllable | fg.uncontrollable)
    while True:
        index = {s: i for i, b in enumerate(blocks) for s in b}
        new = []
        for b in blocks:
            groups: dict = {}
            for s in b:
                sig = tuple(frozenset(index[t] for t in fg.succ(s, a)) for a in actions)
                groups.setdefault(sig, set()).add(s)
            new += [frozenset(g) for g in groups.values()]
        if len(new) == len(blocks):
            return sorted((sorted(b, key=str) for b in new), key=lambda b: str(b[0]))
        blocks = new


def is_bisimulation(fg: FiniteGame, partition) -> bool:
    blocks = [frozenset(b) for b in partition]
    index = {s: i for i, b in enumerate(blocks) for s in b}
    actions = sorted(fg.controllable | fg.uncontrollable)
    for b in blocks:
        sigs = {tuple(frozenset(index[t] for t in fg.succ(s, a)) for a in actions) for s in b}
        if len(sigs) > 1:
            return False
    return True


def bisim_preserves_winning_check(fg: FiniteGame, partition) -> bool:
    """If ``partition`` is a Goal-compatible bisimulation, classes are uniformly winning or losing."""
    goal = set(fg.goal)
    compatible = all(set(b) <= goal or not (set(b) & goal) for b in partition)
    if not (compatible and is_bisimulation(fg, partition)):
        return True
    W, _ = finite_attractor(fg)
    return all(set(b) <= W or not (set(b) & W) for b in partition)


def random_game(n: int, rng: random.Random, n_goal: int = 2, density: float = 0.15) -> FiniteGame:
    states = [f"s{i}" for i in range(n)]
    ctrl, unc = {"c1", "c2"}, {"u1"}
    edges = []
    for s in states:
        for a in sorted(ctrl | unc):
            for t in states:
                p = density if a in ctrl else density / 3
                if rng.random() < p:
                    edges.append((s, a, t))
    goal = set(rng.sample(states, n_goal))
    return FiniteGame(states, goal, ctrl, unc, edges)


def parse_finite(text: str) -> FiniteGame:
    """``state s [goal]``, ``action a controllable|uncontrollable``, ``edge s -> t do a``."""
    states, goal, ctrl, unc, edges = [], set(), set(), set(), []
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "state" and len(parts) in (2, 3):
            states.append(parts[1])
            if len(parts) == 3:
                if parts[2] != "goal":
                    raise ValueError(f"line {n}: expected 'goal'")
                goal.add(parts[1])
        elif parts[0] == "action" and len(parts) == 3 and parts[2] in ("controllable", "uncontrollable"):
            (ctrl if parts[2] == "controllable" else unc).add(parts[1])
        elif parts[0] == "edge" and len(parts) == 6 and parts[2] == "->" and parts[4] == "do":
            edges.append((parts[1], parts[5], parts[3]))
        else:
            raise ValueError(f"line {n}: cannot parse {line!r}")
    if not states:
        raise ValueError("no states")
    return FiniteGame(states, goal, ctrl, unc, edges)
