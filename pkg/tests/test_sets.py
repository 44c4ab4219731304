import random
from fractions import Fraction
from itertools import product

from hypothesis import given, settings, strategies as st

from omgames.game import coarsest_game_partition
from omgames.gamefile import parse_game
from omgames.logic.dnf import Dnf
from omgames.logic.syntax import parse_dnf
from omgames.sets import DefSet, Partition, PieceRef, check_respects, check_well_formed, refine

from util import CORPUS, corpus_text, is_affine, load

F = Fraction
LINE = Partition(1, {"l": (("all", Dnf.true()),)})


def _formulas(p, q):
    return [f for _, f in p.pieces[q]]


def _rect_without_explicit_partition():
    text = corpus_text("rect")
    start = text.index("partition q1 {")
    end = text.index("}", start) + 1
    return parse_game(text[:start] + text[end:])


# ---------------------------------------------------------------- coarsest partition

def test_figure1_partition_has_three_pieces():
    p = coarsest_game_partition(load("fig1"))
    got = _formulas(p, "l0")
    want = [parse_dnf("y1 < 2"), parse_dnf("2 <= y1 & y1 <= 5"), parse_dnf("y1 > 5")]
    assert len(got) == 3
    for w in want:
        assert sum(f.equivalent(w) for f in got) == 1
    assert len(p.pieces["l1"]) == 1


def test_no_guards_gives_one_piece_per_location():
    g = parse_game("dim 1\nlocation a\nlocation b\naction c controllable\n")
    p = coarsest_game_partition(g)
    assert {q: len(v) for q, v in p.pieces.items()} == {"a": 1, "b": 1}


def test_rectangular_partition_is_a_b_c():
    g = _rect_without_explicit_partition()
    got = _formulas(coarsest_game_partition(g), "q1")
    b = parse_dnf("2 <= y1 & y1 <= 5 & 3 <= y2 & y2 <= 4")
    c = parse_dnf("3 <= y1 & y1 <= 5 & 1 <= y2 & y2 <= 2")
    assert len(got) == 3
    for w in (b, c, ~(b | c)):
        assert sum(f.equivalent(w) for f in got) == 1


def test_explicit_rect_partition_matches_the_computed_one():
    explicit = load("rect").partition()
    computed = coarsest_game_partition(_rect_without_explicit_partition())
    for f in _formulas(explicit, "q1"):
        assert any(f.equivalent(h) for h in _formulas(computed, "q1"))


# ---------------------------------------------------------------- classify / respects

def test_classify_examples():
    p = load("rect").partition()
    assert p.classify("q1", (F(1), F(5, 2))) == PieceRef("q1", "A")
    assert p.classify("q1", (F(3), F(7, 2))) == PieceRef("q1", "B")
    f1 = load("fig1").partition()
    name = f1.classify("l0", (F(2),)).piece
    assert f1.formula("l0", name).equivalent(parse_dnf("2 <= y1 & y1 <= 5"))


def test_check_respects_examples():
    p = load("rect").partition()
    assert check_respects(p, DefSet())
    assert check_respects(p, DefSet({"q1": parse_dnf("2 <= y1 & y1 <= 5 & 3 <= y2 & y2 <= 4")}))
    halves = Partition(1, {"l": (("neg", parse_dnf("x < 0")), ("pos", parse_dnf("x >= 0")))})
    assert not check_respects(halves, DefSet({"l": parse_dnf("x > 1")}))


def test_corpus_partitions_are_well_formed():
    for name in CORPUS:
        g = load(name)
        if not is_affine(g):
            continue
        p = g.partition()
        assert check_well_formed(p, {q: g.domain(q) for q in g.locations}) == [], name


def test_well_formedness_diagnostics():
    overlap = Partition(1, {"l": (("a", parse_dnf("x <= 1")), ("b", parse_dnf("x >= 0")))})
    gap = Partition(1, {"l": (("a", parse_dnf("x < 0")), ("b", parse_dnf("x > 0")))})
    assert check_well_formed(overlap, {"l": Dnf.true()})
    assert check_well_formed(gap, {"l": Dnf.true()})


# ---------------------------------------------------------------- refine

def test_refine_by_respected_set_is_identity():
    p = load("rect").partition()
    r = refine(p, [DefSet({"q1": parse_dnf("2 <= y1 & y1 <= 5 & 3 <= y2 & y2 <= 4")})])
    assert r.names("q1") == p.names("q1")


def test_refine_line_at_zero():
    r = refine(LINE, [DefSet({"l": parse_dnf("x <= 0")})])
    assert len(r.pieces["l"]) == 2


def test_refine_rect_by_cone_lines():
    lines = ["y2 <= y1 + 2", "y2 <= 2*y1", "y2 <= y1 - 1", "y2 <= 2*y1 - 4"]
    p = load("rect").partition()
    r = refine(p, [DefSet({"q1": parse_dnf(t)}) for t in lines])
    # independent count: nonempty sign cells of every base piece
    n = 0
    for _, f in p.pieces["q1"]:
        for signs in product([True, False], repeat=4):
            cell = f
            for s, t in zip(signs, lines):
                cell = cell & (parse_dnf(t) if s else ~parse_dnf(t))
            n += cell.is_sat()
    assert len(r.pieces["q1"]) == n == 13


def test_defset_algebra():
    a = DefSet({"l": parse_dnf("x < 2")})
    b = DefSet({"l": parse_dnf("x > 1"), "m": Dnf.true()})
    assert a.union(b).contains("m", (F(7),))
    assert a.intersect(b).equivalent(DefSet({"l": parse_dnf("1 < x & x < 2")}))
    assert a.minus(b).equivalent(DefSet({"l": parse_dnf("x <= 1")}))
    assert a.intersect(b).subset_of(a)
    assert DefSet().is_empty()
    assert a.at("nowhere").equivalent(Dnf.false())


halfplanes = st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.sampled_from(["<", "<="]), st.integers(-4, 4))


def _cut(h):
    a, b, op, c = h
    return DefSet({"q1": parse_dnf(f"{a}*y1 + {b}*y2 {op} {c}")})


@settings(max_examples=40, deadline=None)
@given(st.lists(halfplanes, min_size=1, max_size=3))
def test_refine_respects_cuts_and_is_idempotent(hs):
    p = load("timed-square").partition()
    cuts = [_cut(h) for h in hs]
    r = refine(p, cuts)
    assert check_well_formed(r, {"q1": Dnf.true(), "q2": Dnf.true()}) == []
    for c in cuts:
        assert check_respects(r, c)
    for name, f in r.pieces["q1"]:
        assert sum(f.implies(g) for _, g in p.pieces["q1"]) == 1
    assert len(refine(r, cuts).pieces["q1"]) == len(r.pieces["q1"])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_classification_is_guard_consistent(seed):
    rng = random.Random(seed)
    for name in ("fig1", "rect", "timed-square"):
        g = load(name)
        p = g.partition()
        q = "l0" if name == "fig1" else "q1"
        y = tuple(F(rng.randint(-8, 48), 8) for _ in range(g.dim))
        piece = p.formula(q, p.classify(q, y).piece)
        for t in g.outgoing(q):
            inside = piece.implies(t.guard)
            assert g.guard_holds(t, y) == inside
            if not inside:
                assert piece.disjoint(t.guard)
