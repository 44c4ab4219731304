import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from omgames.dynamics.affine import UnsupportedQuery
from omgames.gamefile import parse_game
from omgames.logic.dnf import Dnf
from omgames.logic.syntax import parse_dnf
from omgames.sets import DefSet
from omgames.solver import AbstractSolver, BackendMismatch, DirectSolver, NoConvergence, is_winning, winning_fixpoint
from omgames.solver.abstract import _safe_prefix
from omgames.solver.finite import (FiniteGame, attractor_strategy, bisim_preserves_winning_check, brute_force_winning,
                                   coarsest_bisimulation, finite_attractor, random_game, strategy_wins, trap_oracle)
from omgames.wordtypes import parse_superword

from util import AFFINE, CORPUS, is_deterministic, load, winning_cells

F = Fraction
ALL = DefSet({"l0": Dnf.true(), "l1": Dnf.true()})


# ---------------------------------------------------------------- predecessor operators

def test_pred_a_figure1():
    s = DirectSolver(load("fig1"))
    got = s.pred_a(DefSet({"l1": Dnf.true()}), "c")
    assert got.at("l0").equivalent(parse_dnf("2 <= y1 & y1 <= 5"))
    assert s.pred_a(ALL, "c").at("l0").equivalent(load("fig1").transitions[0].guard)
    assert s.pred_a(DefSet(), "c").is_empty()


def test_upred_without_uncontrollable_moves():
    s = DirectSolver(load("fig1"))
    assert s.upred_unsafe(DefSet()).is_empty()
    assert s.upred_unsafe(ALL).is_empty()


def test_spiral_upred_is_b():
    solver = AbstractSolver(load("spiral"))
    assert solver.ag.upred(solver.initial(), "q1") == {"B"}


def test_timepred_partial_figure1():
    s = DirectSolver(load("fig1"))
    got = s.timepred_partial(DefSet({"l0": parse_dnf("2 <= y1 & y1 <= 5")}), DefSet())
    assert got.at("l0").equivalent(parse_dnf("y1 <= 5"))
    assert s.timepred_partial(DefSet(), DefSet()).is_empty()


def test_spiral_origin_has_no_uniform_delay():
    # from the origin every superword position with C is preceded by a possible B
    sw = parse_superword("{A}{B,C}{C}")
    assert _safe_prefix(sw.letters, frozenset({"C", "Ci", "Co"}), frozenset({"B"}), True) is None
    assert _safe_prefix(sw.letters, frozenset({"B", "C"}), frozenset(), True) == 2


def test_exab_one_step():
    g = load("exab")
    for mode, want_y in (("partial", False), ("perfect", True)):
        solver = AbstractSolver(g, mode)
        W, _ = solver.step(solver.initial())
        cells = set()
        for q, name in W:
            if q == "q1":
                cells |= set(solver.lp.piece(q, name).cells)
        assert ("Y" in cells) == want_y
        assert {"Aup", "Alow", "B", "C"} <= cells


# ---------------------------------------------------------------- fixpoints

def test_figure1_fixpoint_and_ranks():
    g = load("fig1")
    for backend in ("abstract", "direct"):
        ws = winning_fixpoint(g, "partial", backend)
        assert ws.rank_at("l1", (F(7),)) == 0
        assert ws.rank_at("l0", (F(0),)) == 1
        assert ws.rank_at("l0", (F(6),)) is None
        assert is_winning(ws, ("l0", (F(5),)))


def test_mod2_pointwise():
    for mode in ("partial", "perfect"):
        ws = winning_fixpoint(load("mod2"), mode)
        assert is_winning(ws, ("q1", (0, 0)))
        assert not is_winning(ws, ("q1", (0, 1)))


def test_mod2_bisimulation_splits_the_winning_set():
    ws = winning_fixpoint(load("mod2"))
    won = winning_cells(ws, "q1")
    assert "A0" in won and "A1" not in won


@pytest.mark.parametrize("name", AFFINE)
def test_direct_layers_are_monotone(name):
    g = load(name)
    ws = winning_fixpoint(g, "partial", "direct")
    for a, b in zip(ws.layers, ws.layers[1:]):
        assert a.subset_of(b)
    for q in g.goal:
        assert ws.layers[0].at(q).equivalent(g.domain(q))


@pytest.mark.parametrize("name", CORPUS)
def test_abstract_ranks_and_termination(name):
    g = load(name)
    for mode in ("partial", "perfect"):
        ws = winning_fixpoint(g, mode)
        assert ws.iterations <= ws.lp.size() + 1
        assert set(ws.rank) == set(ws.pieces)
        assert all(ws.rank[(q, p.name)] == 0 for q in g.goal for p in ws.lp.pieces[q])
        # a piece enters at rank k only if something entered at k - 1
        assert set(ws.rank.values()) == set(range(ws.max_rank() + 1))


@pytest.mark.parametrize("name", ["fig1", "timed-square", "regions-2clock"])
def test_deterministic_modes_coincide_directly(name):
    g = load(name)
    assert is_deterministic(g)
    a = winning_fixpoint(g, "partial", "direct").as_defset()
    b = winning_fixpoint(g, "perfect", "direct").as_defset()
    assert a.equivalent(b)


def test_existential_perfect_flag_is_at_least_as_permissive():
    g = load("exab")
    sound = winning_cells(winning_fixpoint(g, "perfect"), "q1")
    loose = winning_cells(winning_fixpoint(g, "perfect", paper_timepred_perfect=True), "q1")
    assert sound <= loose


# ---------------------------------------------------------------- flags and errors

NONDET_U = """dim 1
location a
location g goal
location s
action c controllable
action u uncontrollable
dynamics a affine_cone { d1 = 1 }
transition a -> g when y1 >= 1 do c reset y1 = 0
transition a -> g when true do u reset y1 = 0
transition a -> s when true do u reset y1 = 0
"""


@pytest.mark.parametrize("backend", ["abstract", "direct"])
def test_literal_upred_flag(backend):
    g = parse_game(NONDET_U)
    # one u-successor escapes: unsafe under the existential reading only
    assert not winning_fixpoint(g, "partial", backend).contains("a", (F(0),))
    assert winning_fixpoint(g, "partial", backend, literal_upred=True).contains("a", (F(0),))


def test_iteration_cap():
    with pytest.raises(NoConvergence):
        winning_fixpoint(load("fig1"), "partial", "direct", cap=1)
    assert winning_fixpoint(load("fig1"), "partial", "direct", cap=2).iterations == 2


def test_backend_errors():
    with pytest.raises(BackendMismatch):
        winning_fixpoint(load("spiral"), "partial", "direct")
    with pytest.raises(UnsupportedQuery):
        winning_fixpoint(load("rect"), "perfect", "direct")
    with pytest.raises(ValueError):
        winning_fixpoint(load("fig1"), "sometimes")


# ---------------------------------------------------------------- finite games

def test_finite_examples():
    one = FiniteGame(["s"], {"s"}, {"c"}, set())
    W, rank = finite_attractor(one)
    assert W == {"s"} and rank == {"s": 0}
    chain = FiniteGame(["s0", "s1", "s2"], {"s1"}, {"c"}, {"u"}, [("s0", "c", "s1"), ("s0", "u", "s2")])
    assert finite_attractor(chain)[0] == {"s1"}
    with pytest.raises(ValueError):
        FiniteGame(["s"], set(), {"a"}, {"a"})


def test_bisimulation_check_examples():
    fg = FiniteGame(["w", "l", "g"], {"g"}, {"c"}, set(), [("w", "c", "g")])
    assert bisim_preserves_winning_check(fg, [["w"], ["l"], ["g"]])
    # mixes winning w with losing l, but is no bisimulation: vacuously true
    assert bisim_preserves_winning_check(fg, [["w", "l"], ["g"]])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_finite_attractor_matches_oracles(seed):
    fg = random_game(6, random.Random(seed), density=0.3)
    W, rank = finite_attractor(fg)
    assert W == brute_force_winning(fg) == trap_oracle(fg)
    strat = attractor_strategy(fg, rank)
    assert all(strategy_wins(fg, strat, s) for s in W)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_coarsest_bisimulation_preserves_winning(seed):
    fg = random_game(20, random.Random(seed))
    blocks = coarsest_bisimulation(fg)
    assert sorted(s for b in blocks for s in b) == sorted(fg.states)
    assert bisim_preserves_winning_check(fg, blocks)
    assert bisim_preserves_winning_check(fg, [[s] for s in fg.states])
