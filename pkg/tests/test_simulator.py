import random
from fractions import Fraction

import pytest

from omgames.game import ExtendedState, GameState
from omgames.simulator import EnvironmentPolicy, play, preemptions, run_rng, validate_strategy
from omgames.solver import winning_fixpoint
from omgames.strategy import strategy_move, synthesize
from omgames.dynamics.oracle import TWO_PI_LO

from util import load, winning_cells

F = Fraction


def _setup(name, mode):
    g = load(name)
    ws = winning_fixpoint(g, mode)
    return g, ws, synthesize(g, mode, ws)


def _assert_legal(g, run):
    """Every step delays along the witness, then fires a transition whose guard holds."""
    assert len(run.observation().states) == len(run.states)
    assert len(run.labels) == len(run.states) - 1
    for es, (t, b), nxt in zip(run.states, run.labels, run.states[1:]):
        assert t >= 0
        y2 = g.advance(es.location, es.y, es.witness, t)
        fired = [tr for tr in g.enabled_transitions(es.location, y2, b) if tr.dst == nxt.location]
        assert fired, (es, t, b)


def test_figure1_run():
    g, ws, st = _setup("fig1", "partial")
    run = play(g, st, GameState("l0", (F(0),)), EnvironmentPolicy("random", 1))
    assert run.outcome == "won"
    assert run.labels == [(2, "c")]
    assert run.controller_moves() == 1
    _assert_legal(g, run)


def test_runs_are_reproducible():
    g, ws, st = _setup("rect", "partial")
    init = GameState("q1", (F(1), F(5, 2)))
    for kind in ("random", "greedy"):
        a = play(g, st, init, EnvironmentPolicy(kind, 3), rng=run_rng(3, 0))
        b = play(g, st, init, EnvironmentPolicy(kind, 3), rng=run_rng(3, 0))
        assert a.states == b.states and a.labels == b.labels and a.outcome == b.outcome
    assert run_rng(3, 0).random() != run_rng(3, 1).random()


def test_spiral_partial_origin_is_lost():
    g, ws, st = _setup("spiral", "partial")
    origin = GameState("q1", (0, 0))
    assert play(g, st, origin, EnvironmentPolicy("greedy", 0)).outcome != "won"
    # even a controller that tries some move loses against the greedy environment
    run = play(g, st, origin, EnvironmentPolicy("greedy", 0), best_effort=True)
    assert run.outcome != "won"
    _assert_legal(g, run)


def test_spiral_perfect_origin_always_wins():
    g, ws, st = _setup("spiral", "perfect")
    for i in range(1000):
        kind = "greedy" if i % 10 == 0 else "random"
        run = play(g, st, GameState("q1", (0, 0)), EnvironmentPolicy(kind, i), rng=run_rng(2026, i))
        assert run.outcome == "won", (i, run.states[0])
        assert not run.violations
        th = run.states[0].witness
        assert 0 < th <= TWO_PI_LO and run.labels[0] == (th / 2, "c")


def test_preemptions_are_legal():
    g, ws, st = _setup("mod2", "perfect")
    rng = random.Random(4)
    found = 0
    for _ in range(20):
        y = (F(rng.randint(1, 40), 8), F(rng.randint(0, 1)))
        es = ExtendedState("q1", y, g.random_witness("q1", y, rng))
        for t, u in preemptions(g, es, F(3)):
            assert 0 <= t <= 3 and u in g.uncontrollable
            assert g.enabled(es, t, u)
            found += 1
    assert found


def test_partial_outputs_follow_observations():
    g, ws, st = _setup("rect", "partial")
    for seed in range(5):
        run = play(g, st, GameState("q1", (F(1), F(5, 2))), EnvironmentPolicy("random", seed), rng=run_rng(9, seed))
        for es in run.states:
            assert strategy_move(st, g, es) == strategy_move(st, g, ExtendedState(*es.observed()))


@pytest.mark.parametrize("name, mode", [("fig1", "partial"), ("fig1", "perfect"), ("timed-square", "partial")])
def test_validation_of_deterministic_games(name, mode):
    g, ws, st = _setup(name, mode)
    rep = validate_strategy(g, st, ws, samples=100, seed=1)
    assert rep.ok and rep.wins == rep.runs == 100
    if name == "fig1":
        assert rep.max_moves == 1


def test_mod2_losing_cells_lose():
    g, ws, st = _setup("mod2", "partial")
    assert "C" in winning_cells(ws, "q1") and "B" not in winning_cells(ws, "q1")
    rep = validate_strategy(g, st, ws, samples=60, seed=2, losing_samples=40)
    assert rep.ok
    assert rep.losing_runs == rep.env_wins > 0


def test_validation_runs_are_legal():
    g, ws, st = _setup("exab", "perfect")
    for i in range(20):
        run = play(g, st, GameState("q1", (0, 0)), EnvironmentPolicy("random", i), rng=run_rng(5, i))
        assert run.outcome == "won"
        _assert_legal(g, run)
