"""Oracle dynamics: hand-encoded abstractions with optional concrete evaluators.

An oracle location is described by *cells*, the finest regions on which
the stored labels are constant, grouped into the *pieces* that letters of
words name.  Concrete models map points to cells and trajectories to
windows of cells; they exist for dynamics outside linear arithmetic.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Mapping, Sequence

from ..logic.intervals import Interval, merge_intervals
from ..wordtypes import SuffixWord, Superword, make_word
from .affine import EngineError, safe_from_windows, windows

# rational bounds around 2*pi (2*pi = 6.28318530...)
TWO_PI_LO = Fraction(62831, 10000)
TWO_PI_HI = Fraction(62832, 10000)

HORIZON = Fraction(32)


class AbstractOnly(EngineError):
    """The oracle has no concrete evaluator for this query."""


class Model:
    """Concrete semantics of an oracle location (points are tuples of Fractions)."""

    name = "abstract"
    dim = 2

    def classify(self, y) -> str:
        raise AbstractOnly(f"{self.name}: no concrete evaluator")

    def witnesses(self, y, horizon=None) -> list:
        raise AbstractOnly(f"{self.name}: no concrete evaluator")

    def deterministic_at(self, y) -> bool:
        return len(self.witnesses(y)) == 1

    def cell_windows(self, y, w, horizon=HORIZON) -> list:
        """(Interval, cell) segments of the trajectory ``w`` through ``y``, covering [0, horizon]."""
        raise AbstractOnly(f"{self.name}: no concrete evaluator")

    def advance(self, y, w, tau):
        raise AbstractOnly(f"{self.name}: no concrete evaluator")

    def sample(self, cell: str, rng: random.Random):
        raise AbstractOnly(f"{self.name}: no concrete evaluator")

    def reach_cell_windows(self, y, horizon=HORIZON):
        """Windows of sets of reachable cells over all trajectories (None if not finite)."""
        ws = self.witnesses(y)
        if ws is None:
            return None
        labelled: dict = {}
        for w in ws:
            for iv, cell in self.cell_windows(y, w, horizon):
                labelled.setdefault(cell, []).append(iv)
        return windows({k: merge_intervals(v) for k, v in labelled.items()})


class StaticModel(Model):
    """A single cell that every point belongs to; time passes without motion."""

    name = "static"

    def __init__(self, cell: str, dim: int = 2):
        self.cell = cell
        self.dim = dim

    def classify(self, y):
        return self.cell

    def witnesses(self, y, horizon=None):
        return [None]

    def cell_windows(self, y, w, horizon=HORIZON):
        return [(Interval(Fraction(0), True, None, False), self.cell)]

    def advance(self, y, w, tau):
        return tuple(y)

    def sample(self, cell, rng):
        return tuple(Fraction(0) for _ in range(self.dim))


class SpiralModel(Model):
    """Polar coordinates ``(r, phi)``, ``phi`` in (0, 2*pi]; the origin is ``r = 0``.

    From the origin the trajectories are the rays of angle theta, meeting the
    spiral ``r = phi`` at time theta.  Elsewhere the flow is radial,
    ``(1 + t) * r``, so the spiral is met when ``(1 + t) r = phi``.
    Cells: ``A`` origin, ``B`` spiral, ``Ci`` inside it, ``Co`` outside.
    Angles of rational witnesses stay below ``TWO_PI_LO``.
    """

    name = "spiral"
    dim = 2
    cells = ("A", "B", "Ci", "Co")

    def classify(self, y):
        r, phi = (Fraction(v) for v in y)
        if r < 0 or (r > 0 and not 0 < phi < TWO_PI_LO):
            raise EngineError(f"spiral point {y} outside the supported polar range")
        if r == 0:
            return "A"
        if r == phi:
            return "B"
        return "Ci" if r < phi else "Co"

    def witnesses(self, y, horizon=None):
        if Fraction(y[0]) != 0:
            return [None]
        h = Fraction(horizon) if horizon else Fraction(1)
        h = min(max(h, Fraction(1, 100)), TWO_PI_LO)
        cands = {h, h / 2, h / 3, h / 10, Fraction(1, 2), Fraction(1), Fraction(3), Fraction(6)}
        return sorted(c for c in cands if 0 < c < TWO_PI_LO)

    def deterministic_at(self, y):
        return Fraction(y[0]) != 0

    def cell_windows(self, y, w, horizon=HORIZON):
        r, phi = (Fraction(v) for v in y)
        zero = Fraction(0)
        if r == 0:
            th = Fraction(w)
            return [(Interval.point(zero), "A"), (Interval(zero, False, th, False), "Ci"),
                    (Interval.point(th), "B"), (Interval(th, False, None, False), "Co")]
        cell = self.classify(y)
        if cell == "Co":
            return [(Interval(zero, True, None, False), "Co")]
        if cell == "B":
            return [(Interval.point(zero), "B"), (Interval(zero, False, None, False), "Co")]
        cross = phi / r - 1
        return [(Interval(zero, True, cross, False), "Ci"), (Interval.point(cross), "B"),
                (Interval(cross, False, None, False), "Co")]

    def advance(self, y, w, tau):
        r, phi = (Fraction(v) for v in y)
        tau = Fraction(tau)
        if r == 0:
            return (tau, Fraction(w)) if tau > 0 else (Fraction(0), Fraction(0))
        return ((1 + tau) * r, phi)

    def reach_cell_windows(self, y, horizon=HORIZON):
        if Fraction(y[0]) != 0:
            return super().reach_cell_windows(y, horizon)
        zero = Fraction(0)
        # spiral crossings happen for every angle up to 2*pi; the window ends are
        # rounded outwards, so B-reachability is over-approximated (sound for safety)
        return [(Interval.point(zero), frozenset({"A"})),
                (Interval(zero, False, TWO_PI_HI, True), frozenset({"B", "Ci", "Co"})),
                (Interval(TWO_PI_HI, False, None, False), frozenset({"Co"}))]

    def sample(self, cell, rng):
        phi = Fraction(rng.randint(1, 6200), 1000)
        if cell == "A":
            return (Fraction(0), Fraction(0))
        if cell == "B":
            return (phi, phi)
        if cell == "Ci":
            return (phi * Fraction(rng.randint(1, 999), 1000), phi)
        if cell == "Co":
            return (phi + Fraction(rng.randint(1, 5000), 1000), phi)
        raise EngineError(f"unknown spiral cell {cell}")


class Mod2Model(Model):
    """Two half-lines ``x2 in {0, 1}``, ``x1 >= 0``, flow ``(x1 + t, x2)``.

    Unit cells ``[k, k+1)``: ``A0``/``A1`` for ``k = 0``; for ``k >= 1`` the
    cell is ``C`` when ``k + x2`` is odd and ``B`` otherwise.
    """

    name = "mod2"
    dim = 2
    cells = ("A0", "A1", "B", "C")

    def classify(self, y):
        x1, x2 = (Fraction(v) for v in y)
        if x1 < 0 or x2 not in (0, 1):
            raise EngineError(f"modulo-2 point {y} outside the state space")
        k = x1.numerator // x1.denominator
        if k == 0:
            return "A0" if x2 == 0 else "A1"
        return "C" if (k + int(x2)) % 2 == 1 else "B"

    def witnesses(self, y, horizon=None):
        return [None]

    def cell_windows(self, y, w, horizon=HORIZON):
        x1, x2 = (Fraction(v) for v in y)
        out = []
        t = Fraction(0)
        pos = x1
        while t <= horizon:
            k = pos.numerator // pos.denominator
            nxt = Fraction(k + 1) - x1
            out.append((Interval(t, True, nxt, False), self.classify((pos, x2))))
            t = nxt
            pos = x1 + t
        last_iv, last_cell = out[-1]
        out[-1] = (Interval(last_iv.lo, True, last_iv.hi, False), last_cell)
        return out

    def advance(self, y, w, tau):
        return (Fraction(y[0]) + Fraction(tau), Fraction(y[1]))

    def sample(self, cell, rng):
        frac = Fraction(rng.randint(0, 999), 1000)
        if cell == "A0":
            return (frac, Fraction(0))
        if cell == "A1":
            return (frac, Fraction(1))
        k = rng.randint(1, 6)
        x2 = rng.randint(0, 1)
        if (cell == "C") != ((k + x2) % 2 == 1):
            x2 = 1 - x2
        return (Fraction(k) + frac, Fraction(x2))


class TableModel(Model):
    """Finitely many trajectories leaving a common root point.

    Points are ``(j, t)``: trajectory index and elapsed time; the root is
    ``(0, 0)``.  Each trajectory is a list of ``(Interval, cell)`` segments
    starting with the root cell at ``t = 0``.
    """

    name = "table"
    dim = 2

    def __init__(self, trajectories: Mapping[str, list]):
        self.names = list(trajectories)
        self.trajs = [list(trajectories[n]) for n in self.names]
        if not self.trajs:
            raise EngineError("table oracle needs at least one trajectory")
        roots = {segs[0][1] for segs in self.trajs}
        for segs in self.trajs:
            if not (segs[0][0].is_point and segs[0][0].lo == 0):
                raise EngineError("every trajectory starts with the root cell on [0, 0]")
            for (a, _), (b, _) in zip(segs, segs[1:]):
                if a.hi != b.lo or a.hi_closed == b.lo_closed:
                    raise EngineError("trajectory segments must tile the time line")
            if segs[-1][0].hi is not None:
                raise EngineError("the last segment of a trajectory must be unbounded")
        if len(roots) != 1:
            raise EngineError("all trajectories must start in the same root cell")
        seen = [c for segs in self.trajs for _, c in segs[1:]]
        dup = sorted({c for c in seen if seen.count(c) > 1} | (set(seen) & roots))
        if dup:
            # one cell per segment keeps every stored label constant on its cell
            raise EngineError(f"cells {dup} name several trajectory segments; "
                              "give each segment its own cell and group them into pieces")
        self.root = roots.pop()
        self.cells = tuple(dict.fromkeys(c for segs in self.trajs for _, c in segs))

    def _norm(self, y):
        j, t = int(y[0]), Fraction(y[1])
        if t < 0 or not 0 <= j < len(self.trajs):
            raise EngineError(f"table point {y} outside the state space")
        return (0, Fraction(0)) if t == 0 else (j, t)

    def classify(self, y):
        j, t = self._norm(y)
        for iv, cell in self.trajs[j]:
            if iv.contains(t):
                return cell
        raise EngineError("uncovered time")

    def witnesses(self, y, horizon=None):
        j, t = self._norm(y)
        return list(range(len(self.trajs))) if t == 0 else [j]

    def cell_windows(self, y, w, horizon=HORIZON):
        j, t = self._norm(y)
        w = j if t > 0 else int(w)
        out = []
        for iv, cell in self.trajs[w]:
            lo = None if iv.lo is None else iv.lo - t
            hi = None if iv.hi is None else iv.hi - t
            if hi is not None and (hi < 0 or (hi == 0 and not iv.hi_closed)):
                continue
            lc = iv.lo_closed
            if lo is None or lo < 0 or (lo == 0 and not lc and t > 0 and iv.contains(t)):
                lo, lc = Fraction(0), True
            out.append((Interval(lo, lc, hi, iv.hi_closed and hi is not None), cell))
        return out

    def advance(self, y, w, tau):
        j, t = self._norm(y)
        w = j if t > 0 else int(w)
        t2 = t + Fraction(tau)
        return (Fraction(w), t2) if t2 > 0 else (Fraction(0), Fraction(0))

    def sample(self, cell, rng):
        opts = []
        for j, segs in enumerate(self.trajs):
            for iv, c in segs:
                if c == cell:
                    opts.append((j, iv))
        if not opts:
            raise EngineError(f"cell {cell} never visited")
        j, iv = rng.choice(opts)
        if iv.is_point:
            return (Fraction(j), iv.lo)
        lo = iv.lo
        hi = iv.hi if iv.hi is not None else lo + 4
        return (Fraction(j), lo + (hi - lo) * Fraction(rng.randint(1, 999), 1000))

    def words(self, piece_of: Mapping[str, str]) -> dict:
        """Suffix labels per cell derived from the trajectory table."""
        out: dict = {}
        for segs in self.trajs:
            names = [piece_of[c] for _, c in segs]
            for i, (_, c) in enumerate(segs):
                out.setdefault(c, set()).add(_collapse(names[i:]))
        return {c: frozenset(ws) for c, ws in out.items()}


def _collapse(names) -> SuffixWord:
    letters = []
    for n in names:
        if not letters or letters[-1] != n:
            letters.append(n)
    return make_word(letters)


MODELS = {"spiral": SpiralModel, "mod2": Mod2Model}


class OracleDynamics:
    kind = "oracle"

    def __init__(self, cells: Sequence[str], groups: Mapping[str, Sequence[str]] | None = None,
                 suffix: Mapping[str, frozenset] | None = None,
                 superword: Mapping[str, Superword] | None = None, model: Model | None = None):
        self.cells = tuple(cells)
        groups = dict(groups or {})
        grouped = {c for cs in groups.values() for c in cs}
        for c in self.cells:
            if c not in grouped:
                groups[c] = [c]
        self.groups = {p: tuple(cs) for p, cs in groups.items()}
        self.piece_of = {c: p for p, cs in self.groups.items() for c in cs}
        self.model = model
        suffix = dict(suffix or {})
        if isinstance(model, TableModel):
            derived = model.words(self.piece_of)
            for c in self.cells:
                suffix.setdefault(c, derived.get(c, frozenset()))
        self.suffix = {c: frozenset(ws) for c, ws in suffix.items()}
        self.superword_label = dict(superword or {})
        if isinstance(model, (TableModel, StaticModel)):
            for c in self.cells:
                if c not in self.superword_label:
                    self.superword_label[c] = self._derive_superword(c)

    def __repr__(self):
        return f"OracleDynamics(cells={self.cells}, model={getattr(self.model, 'name', None)})"

    @property
    def pieces(self) -> list:
        order = []
        for c in self.cells:
            p = self.piece_of[c]
            if p not in order:
                order.append(p)
        return order

    def _derive_superword(self, cell):
        rng = random.Random(0)
        y = self.model.sample(cell, rng)
        ws = self.model.reach_cell_windows(y)
        letters = []
        for _, s in ws:
            s2 = frozenset(self.piece_of[c] for c in s)
            if not letters or letters[-1] != s2:
                letters.append(s2)
        return Superword(tuple(letters))

    def diagnostics(self) -> list:
        out = []
        for p, cs in self.groups.items():
            for c in cs:
                if c not in self.cells:
                    out.append(f"piece {p} groups unknown cell {c}")
        all_words: dict = {}
        for c, ws in self.suffix.items():
            if c not in self.cells:
                out.append(f"suffix label for unknown cell {c}")
                continue
            for w in ws:
                for letter in w.positions():
                    if letter not in self.groups:
                        out.append(f"word {w} of cell {c} uses unknown piece {letter}")
                if w.first() != self.piece_of[c]:
                    out.append(f"word {w} of cell {c} must start with its piece {self.piece_of[c]}")
            all_words.setdefault(self.piece_of[c], set()).update(ws)
        for c, ws in self.suffix.items():
            for w in ws:
                for s in w.proper_suffixes():
                    if s not in all_words.get(s.first(), ()):
                        out.append(f"suffix {s} of word {w} is not the label of any {s.first()} cell")
        for c, sw in self.superword_label.items():
            for letter in sw.letters:
                if not letter or not letter <= set(self.groups):
                    out.append(f"superword of {c} has an invalid letter {sorted(letter)}")
            if sw.letters and sw.letters[0] != frozenset({self.piece_of.get(c)}):
                out.append(f"superword of {c} must start with {{{self.piece_of.get(c)}}}")
        return out

    # concrete queries -----------------------------------------------------
    def _need_model(self):
        if self.model is None:
            raise AbstractOnly("abstract-only engine: no concrete evaluator")
        return self.model

    def classify_cell(self, y) -> str:
        return self._need_model().classify(y)

    def piece_windows(self, y, w, horizon=HORIZON) -> list:
        segs = self._need_model().cell_windows(y, w, horizon)
        return [(iv, self.piece_of[c]) for iv, c in segs]

    def reach_pieces(self, y, tau) -> set:
        tau = Fraction(tau)
        m = self._need_model()
        if tau == 0:
            return {self.piece_of[m.classify(y)]}
        ws = m.reach_cell_windows(y, max(HORIZON, tau + 1))
        for iv, s in ws:
            if iv.contains(tau):
                return {self.piece_of[c] for c in s}
        return set()

    def safe_intervals(self, y, target, avoid, witness=None, use_cells=False) -> list:
        """Safe delays; ``target``/``avoid`` name cells when ``use_cells`` else pieces."""
        m = self._need_model()
        conv = (lambda c: c) if use_cells else (lambda c: self.piece_of[c])
        if witness is not None or m.deterministic_at(y):
            w = witness if witness is not None else m.witnesses(y)[0]
            ws = [(iv, frozenset({conv(c)})) for iv, c in m.cell_windows(y, w)]
        else:
            raw = m.reach_cell_windows(y)
            if raw is None:
                raise AbstractOnly("no finite description of the reachable windows")
            ws = [(iv, frozenset(conv(c) for c in s)) for iv, s in raw]
        return _clip(safe_from_windows(ws, set(target), set(avoid)), HORIZON)


def _clip(ivs: list, horizon) -> list:
    return ivs
