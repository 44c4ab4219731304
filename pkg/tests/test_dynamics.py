import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from omgames.dynamics.affine import AffineCone, EngineError
from omgames.dynamics.oracle import AbstractOnly, OracleDynamics, SpiralModel, TableModel
from omgames.gamefile import parse_segments
from omgames.logic.intervals import Interval
from omgames.logic.syntax import parse_dnf

from util import load

F = Fraction


def rect():
    g = load("rect")
    return g.dynamics["q1"], list(g.partition().pieces["q1"])


def square():
    g = load("timed-square")
    return g.dynamics["q1"], list(g.partition().pieces["q1"])


def _piece_at(pieces, y):
    pt = {"y1": y[0], "y2": y[1]}
    return {n for n, f in pieces if f.holds(pt)}


# ---------------------------------------------------------------- affine cone

def test_timed_engine_is_deterministic():
    eng, _ = square()
    assert eng.deterministic and eng.point == (1, 1)
    assert not rect()[0].deterministic


def test_reach_pieces_examples():
    eng, pieces = rect()
    assert eng.reach_pieces(pieces, (F(2), F(1, 2)), F(1, 10)) == {"A"}
    assert eng.reach_pieces(pieces, (F(1), F(5, 2)), 0) == {"A"}


def test_reach_pieces_matches_direction_sampling():
    eng, pieces = rect()
    y, tau = (F(1), F(5, 2)), F(1)
    sampled = set()
    for k in range(1001):
        d2 = 1 + F(k, 1000)
        sampled |= _piece_at(pieces, (y[0] + tau, y[1] + tau * d2))
    assert eng.reach_pieces(pieces, y, tau) == sampled == {"A", "B"}


@pytest.mark.parametrize("y, d, word", [
    ((F(1, 2), F(1, 2)), (1, 1), "ABA"),
    ((F(3), F(3)), (1, 1), "A"),
])
def test_timed_trajectory_words(y, d, word):
    eng, pieces = square()
    assert str(eng.trajectory_word(pieces, y, d)[0]) == word


def test_rect_extreme_slopes():
    eng, pieces = rect()
    y1 = (F(1), F(5, 2))
    # the slope-1 ray passes (2, 7/2) in B; the slope-2 ray passes above B
    assert str(eng.trajectory_word(pieces, y1, (1, 1))[0]) == "ABA"
    assert str(eng.trajectory_word(pieces, y1, (1, 2))[0]) == "A"


def test_direction_outside_cone_is_rejected():
    eng, pieces = rect()
    with pytest.raises(EngineError):
        eng.trajectory_word(pieces, (0, 0), (1, 3))


def test_safe_time_figure1():
    g = load("fig1")
    eng, pieces = g.dynamics["l0"], list(g.partition().pieces["l0"])
    target = g.partition().classify("l0", (F(3),)).piece
    assert eng.safe_intervals(pieces, (F(0),), [target], []) == [Interval.closed(2, 5)]


def test_safe_time_includes_zero_in_own_piece():
    eng, pieces = square()
    ivs = eng.safe_intervals(pieces, (F(3, 2), F(3, 2)), ["B"], [])
    assert ivs and ivs[0].contains(0)


def test_safe_time_partial_quantifies_all_directions():
    eng, pieces = rect()
    y1 = (F(1), F(5, 2))
    # the slope-1 ray reaches B at t = 1, the slope-2 ray never does
    assert eng.safe_intervals(pieces, y1, ["B"], []) == []
    assert eng.safe_intervals(pieces, y1, ["B"], [], direction=(1, 1))[0] == Interval.closed(1, F(3, 2))
    assert eng.safe_intervals(pieces, y1, ["B"], [], direction=(1, 2)) == []


def test_empty_direction_set_is_rejected():
    with pytest.raises(EngineError):
        AffineCone(1, parse_dnf("d1 > 1 & d1 < 1"))


# ---------------------------------------------------------------- oracles

def test_spiral_evaluator():
    m = SpiralModel()
    assert m.classify((0, 0)) == "A"
    assert m.classify((F(1), F(1))) == "B"
    assert m.classify((F(1), F(2))) == "Ci"
    th = F(3)
    (a, ci, b, co) = m.cell_windows((0, 0), th)
    assert (a[1], ci[1], b[1], co[1]) == ("A", "Ci", "B", "Co")
    assert b[0] == Interval.point(th)
    assert m.classify(m.advance((0, 0), th, th)) == "B"
    # radial flow from (r, phi) meets the spiral when (1 + t) r = phi
    assert m.classify(m.advance((F(1), F(4)), None, F(3))) == "B"


def test_spiral_safe_time_on_a_ray():
    eng = load("spiral").dynamics["q1"]
    th = F(5, 2)
    assert eng.safe_intervals((0, 0), ["C"], ["B"], witness=th) == [Interval(F(0), False, th, False)]


def test_spiral_labels():
    eng = load("spiral").dynamics["q1"]
    assert {str(w) for w in eng.suffix["A"]} == {"ACBC"}
    assert eng.diagnostics() == []


def test_table_model_needs_one_cell_per_segment():
    trajs = {"up": parse_segments("Y[0,0] X(0,1) B[1,inf)"), "low": parse_segments("Y[0,0] X(0,1) C[1,inf)")}
    TableModel({"up": trajs["up"]})
    with pytest.raises(EngineError):
        TableModel({"up": parse_segments("Y[0,0] X(0,1) B[1,2] X(2,inf)")})


def test_abstract_only_engine():
    eng = OracleDynamics(["A", "B"])
    assert eng.reach_pieces is not None
    with pytest.raises(AbstractOnly):
        eng.reach_pieces((0, 0), 1)


def test_suffix_closure_is_diagnosed():
    from omgames.wordtypes import parse_word

    eng = OracleDynamics(["A", "B"], suffix={"A": frozenset({parse_word("AB")}), "B": frozenset({parse_word("BA")})})
    assert any("suffix" in m for m in eng.diagnostics())


# ---------------------------------------------------------------- properties

points = st.tuples(st.integers(-10, 60), st.integers(-10, 60)).map(lambda p: (F(p[0], 8), F(p[1], 8)))


@settings(max_examples=100, deadline=None)
@given(points)
def test_reach_at_zero_is_own_piece(y):
    for eng, pieces in (rect(), square()):
        assert eng.reach_pieces(pieces, y, 0) == _piece_at(pieces, y)


@settings(max_examples=100, deadline=None)
@given(points, st.integers(0, 40).map(lambda k: F(k, 8)))
def test_reach_pieces_consistent_with_words(y, tau):
    eng, pieces = rect()
    got = eng.reach_pieces(pieces, y, tau)
    dirs = set(eng.witness_directions(pieces, y)) | {(1, 1 + F(k, 64)) for k in range(65)}
    hit = set()
    for d in dirs:
        _, ws = eng.trajectory_word(pieces, y, d)
        for iv, s in ws:
            if iv.contains(tau):
                hit |= s
    # at fixed tau the reachable set is a vertical segment; it meets the closed
    # rectangles in intervals whose single-point cases sit at the fan's end slopes
    assert got == hit


@settings(max_examples=60, deadline=None)
@given(points, st.integers(0, 10 ** 6))
def test_word_length_bound(y, seed):
    eng, pieces = rect()
    rng = random.Random(seed)
    d = (1, 1 + F(rng.randint(0, 100), 100))
    word, _ = eng.trajectory_word(pieces, y, d)
    letters = list(word.positions())
    assert len(letters) <= 1 + 2 * 8
    assert all(a != b for a, b in zip(letters, letters[1:]))
