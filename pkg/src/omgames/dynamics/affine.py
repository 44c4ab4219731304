"""Affine-cone dynamics: trajectories ``y + tau*d`` with ``d`` in a bounded polytope D.

Symbolic queries linearize ``u = tau*d``: a direction constraint
``c.d op b`` becomes ``c.u op tau*b`` for ``tau > 0``, and ``u = 0`` at
``tau = 0``.  Concrete queries (a fixed start point) reduce to interval
arithmetic along a ray or over the reach formulas.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from ..logic.constraints import Constraint, Lin, from_int_coeffs, hyperplane, make
from ..logic.dnf import Dnf, sample_term, simplify_term, term_sat
from ..logic.intervals import Interval, merge_intervals
from ..wordtypes import SuffixWord, Superword, make_word

TAU = "tau"


class EngineError(RuntimeError):
    pass


class NonOMinimalTrace(EngineError):
    """A trajectory word exceeded the facet-count bound."""


class UnsupportedQuery(EngineError):
    pass


def dvars(n: int) -> list:
    return [f"d{i + 1}" for i in range(n)]


def uvars(n: int) -> list:
    return [f"u{i + 1}" for i in range(n)]


def yvars(n: int) -> list:
    return [f"y{i + 1}" for i in range(n)]


# ------------------------------------------------------------ interval helpers

def line_intervals(d: Dnf, base: Mapping, slope: Mapping) -> list:
    """Intervals of ``t >= 0`` with ``base + t*slope`` satisfying ``d``.

    ``base`` must assign every variable of ``d``; ``slope`` may omit variables
    that stay fixed.
    """
    out = []
    for term in d.terms:
        lo, lc, hi, hc = Fraction(0), True, None, False
        ok = True
        for c in term:
            k = Fraction(0)
            rhs = Fraction(c.bound)
            for v, a in c.coeffs:
                rhs -= a * base[v]
                s = slope.get(v)
                if s:
                    k += a * s
            if k == 0:
                if c.op == "=" and rhs != 0 or not (rhs > 0 or (rhs == 0 and c.op != "<")):
                    ok = False
                    break
                continue
            val = rhs / k
            if c.op == "=":
                if val < lo or (val == lo and not lc) or (hi is not None and (val > hi or (val == hi and not hc))):
                    ok = False
                    break
                lo, lc, hi, hc = val, True, val, True
                continue
            strict = c.op == "<"
            if k > 0:
                if hi is None or val < hi or (val == hi and strict):
                    hi, hc = val, not strict
            else:
                if val > lo or (val == lo and strict):
                    lo, lc = val, not strict
            if hi is not None and (lo > hi or (lo == hi and not (lc and hc))):
                ok = False
                break
        if ok and (hi is None or lo < hi or (lo == hi and lc and hc)):
            out.append(Interval(lo, lc, hi, hc and hi is not None))
    return merge_intervals(out)


def windows(labelled: Mapping[str, list]) -> list:
    """Maximal windows of ``t >= 0`` on which the set of active labels is constant.

    ``labelled`` maps a label to its (merged) interval list.  Returns a list
    of ``(Interval, frozenset)``.
    """
    pts = {Fraction(0)}
    for ivs in labelled.values():
        for iv in ivs:
            if iv.lo is not None:
                pts.add(iv.lo)
            if iv.hi is not None:
                pts.add(iv.hi)
    pts = sorted(p for p in pts if p >= 0)
    elems = []
    for i, p in enumerate(pts):
        elems.append(Interval.point(p))
        nxt = pts[i + 1] if i + 1 < len(pts) else None
        elems.append(Interval(p, False, nxt, False))
    out = []
    for e in elems:
        s = e.sample()
        active = frozenset(k for k, ivs in labelled.items() if any(iv.contains(s) for iv in ivs))
        if out and out[-1][1] == active:
            prev = out[-1][0]
            out[-1] = (Interval(prev.lo, prev.lo_closed, e.hi, e.hi_closed), active)
        else:
            out.append((e, active))
    return out


# ------------------------------------------------------------ engine

class AffineCone:
    kind = "affine_cone"

    def __init__(self, dim: int, D: Dnf):
        self.dim = dim
        self.D = D
        self.dv = dvars(dim)
        problems = self.diagnostics()
        if problems:
            raise EngineError("; ".join(problems))
        (self.term,) = D.terms
        self.point = self._unique_point()
        self._shadow_cache: dict = {}

    def __repr__(self):
        from ..logic.syntax import format_dnf

        return f"AffineCone({self.dim}, {format_dnf(self.D)})"

    def diagnostics(self) -> list:
        out = []
        if len(self.D.terms) != 1:
            out.append("direction set must be a single conjunction of linear constraints")
            return out
        extra = self.D.variables - set(self.dv)
        if extra:
            out.append(f"direction constraints use unknown variables {sorted(extra)}")
        if not self.D.is_sat():
            out.append("direction set D is empty")
            return out
        (term,) = self.D.terms
        rec = frozenset(Constraint(c.coeffs, "=" if c.op == "=" else "<=", 0) for c in term)
        for v in self.dv:
            for c in (make({v: -1}, "<", 0), make({v: 1}, "<", 0)):
                if term_sat(rec | {c}):
                    out.append("direction set D must be bounded")
                    return out
        return out

    # -- direction set ------------------------------------------------
    def _unique_point(self):
        p = sample_term(self.term, self.dv)
        for v in self.dv:
            for c in (make({v: 1}, "<", p[v]), make({v: -1}, "<", -p[v])):
                if term_sat(self.term | {c}):
                    return None
        return tuple(p[v] for v in self.dv)

    @property
    def deterministic(self) -> bool:
        return self.point is not None

    def contains_direction(self, d: Sequence) -> bool:
        return self.D.holds(dict(zip(self.dv, d)))

    @lru_cache(maxsize=None)
    def vertices(self) -> tuple:
        if self.point is not None:
            return (self.point,)
        cons = sorted(self.term)
        found = set()
        for combo in combinations(cons, self.dim):
            tight = [Constraint(c.coeffs, "=", c.bound) for c in combo]
            t = simplify_term(set(self.term) | set(tight))
            if t is None or not term_sat(t):
                continue
            p = sample_term(t, self.dv)
            unique = True
            for v in self.dv:
                for c in (make({v: 1}, "<", p[v]), make({v: -1}, "<", -p[v])):
                    if term_sat(t | {c}):
                        unique = False
            if unique:
                found.add(tuple(p[v] for v in self.dv))
        return tuple(sorted(found))

    def centre(self) -> tuple:
        if self.point is not None:
            return self.point
        vs = self.vertices()
        return tuple(sum(v[i] for v in vs) / len(vs) for i in range(self.dim))

    def dirs_formula(self, u: Sequence[str], tau: str = TAU) -> Dnf:
        """``u`` lies in ``tau * D`` (with ``tau >= 0``)."""
        zero = [make({tau: 1}, "=", 0)] + [make({x: 1}, "=", 0) for x in u]
        pos = [make({tau: -1}, "<", 0)]
        rename = dict(zip(self.dv, u))
        for c in self.term:
            coeffs = {rename[v]: k for v, k in c.coeffs}
            coeffs[tau] = coeffs.get(tau, 0) - c.bound
            pos.append(make(coeffs, c.op, 0))
        return Dnf.conj(zero) | Dnf.conj(pos)

    # -- symbolic reach ------------------------------------------------
    def shifted(self, f: Dnf, u: Sequence[str]) -> Dnf:
        ys = yvars(self.dim)
        return f.substitute({y: Lin({y: 1, w: 1}) for y, w in zip(ys, u)})

    def reach_formula(self, f: Dnf, tau: str = TAU) -> Dnf:
        """Formula over (y, tau): some trajectory from y is in ``f`` after tau."""
        key = ("reach", f, tau)
        hit = self._shadow_cache.get(key)
        if hit is None:
            u = uvars(self.dim)
            body = self.dirs_formula(u, tau) & self.shifted(f, u) & Dnf.atom(make({tau: -1}, "<=", 0))
            hit = body.exists(u)
            self._shadow_cache[key] = hit
        return hit

    def all_reach_formula(self, f: Dnf, tau: str = TAU) -> Dnf:
        """Formula over (y, tau): every trajectory from y is in ``f`` after tau."""
        key = ("all", f, tau)
        hit = self._shadow_cache.get(key)
        if hit is None:
            u = uvars(self.dim)
            bad = self.dirs_formula(u, tau) & self.shifted(~f, u)
            hit = Dnf.atom(make({tau: -1}, "<=", 0)) & ~bad.exists(u)
            self._shadow_cache[key] = hit
        return hit

    # -- concrete queries ----------------------------------------------
    def ray_windows(self, pieces: Sequence, y: Sequence, d: Sequence) -> list:
        """Maximal windows of constant piece membership along ``y + t*d``.

        Between consecutive crossings of the base hyperplanes every atom keeps
        its truth value, so one sample per element decides the window.
        """
        key = tuple(pieces)
        y = [Fraction(v) for v in y]
        d = [Fraction(v) for v in d]
        times = {Fraction(0)}
        lines = []
        for a, b in _normals(key, self.dim):
            alpha = sum(ai * yi for ai, yi in zip(a, y)) - b
            k = sum(ai * di for ai, di in zip(a, d))
            if k:
                t = -alpha / k
                lines.append((1 if k > 0 else -1, t))
                if t > 0:
                    times.add(t)
            else:
                lines.append((0, (alpha > 0) - (alpha < 0)))
        comp = _compiled(key, self.dim)
        pts = sorted(times)
        elems = []
        for i, p in enumerate(pts):
            nxt = pts[i + 1] if i + 1 < len(pts) else None
            elems.append((Interval.point(p), p))
            elems.append((Interval(p, False, nxt, False), (p + nxt) / 2 if nxt is not None else p + 1))
        out = []
        for iv, s in elems:
            signs = [k * ((s > t) - (s < t)) if k else t for k, t in lines]
            active = _member(comp, signs)
            if out and out[-1][1] == active:
                prev = out[-1][0]
                out[-1] = (Interval(prev.lo, prev.lo_closed, iv.hi, iv.hi_closed), active)
            else:
                out.append((iv, active))
        return out

    def reach_windows(self, pieces: Sequence, y: Sequence) -> list:
        base = dict(zip(yvars(self.dim), y))
        base[TAU] = Fraction(0)
        labelled = {name: line_intervals(self.reach_formula(f), base, {TAU: 1}) for name, f in pieces}
        return windows(labelled)

    def reach_pieces(self, pieces: Sequence, y: Sequence, tau) -> set:
        tau = Fraction(tau)
        pt = dict(zip(yvars(self.dim), y))
        pt[TAU] = tau
        return {name for name, f in pieces if self.reach_formula(f).holds(pt)}

    def trajectory_word(self, pieces: Sequence, y: Sequence, d: Sequence, bound: int | None = None):
        if not self.contains_direction(d):
            raise EngineError(f"direction {tuple(d)} is not in D")
        ws = self.ray_windows(pieces, y, d)
        letters = []
        for iv, s in ws:
            if len(s) != 1:
                raise EngineError(f"pieces overlap or miss the trajectory at t={iv.sample()}: {sorted(s)}")
            letters.append(next(iter(s)))
        if bound is None:
            bound = 1 + 2 * len(_normals(tuple(pieces), self.dim))
        if len(letters) > bound:
            raise NonOMinimalTrace(f"word of length {len(letters)} exceeds bound {bound}")
        return make_word(letters), ws

    def superword(self, pieces: Sequence, y: Sequence) -> Superword:
        ws = self.reach_windows(pieces, y)
        return Superword(tuple(s for _, s in ws), tuple(iv for iv, _ in ws))

    def witness_directions(self, pieces: Sequence, y: Sequence) -> list:
        """Directions covering every distinct word from ``y`` (vertices included)."""
        if self.point is not None:
            return [self.point]
        normals = []
        for a, b in _normals(tuple(pieces), self.dim):
            normals.append((a, b - sum(ai * Fraction(yi) for ai, yi in zip(a, y))))
        crit = [a for a, _ in normals]
        for (a, ba), (b, bb) in combinations(normals, 2):
            crit.append([ba * bj - bb * ai for ai, bj in zip(a, b)])
        crit = [c for c in crit if any(c)]
        return self._direction_faces(crit)

    def _direction_faces(self, crit: list) -> list:
        verts = self.vertices()
        if len(verts) == 2:
            e1, e2 = verts
            diff = [b - a for a, b in zip(e1, e2)]
            ss = {Fraction(0), Fraction(1)}
            for c in crit:
                den = sum(ci * di for ci, di in zip(c, diff))
                if den != 0:
                    s = -sum(ci * ei for ci, ei in zip(c, e1)) / den
                    if 0 < s < 1:
                        ss.add(s)
            ss = sorted(ss)
            samples = list(ss) + [(a + b) / 2 for a, b in zip(ss, ss[1:])]
            return [tuple(a + s * dd for a, dd in zip(e1, diff)) for s in sorted(samples)]
        # general polytope: enumerate the faces of D cut by the critical hyperplanes
        cells = [self.term]
        for c in crit:
            coeffs = {v: ci for v, ci in zip(self.dv, c) if ci}
            nxt = []
            for t in cells:
                for op, sign in (("<", 1), ("=", 1), ("<", -1)):
                    con = make({v: sign * k for v, k in coeffs.items()}, op, 0)
                    s = simplify_term(t | {con}) if con not in (True, False) else (t if con else None)
                    if s is not None and term_sat(s):
                        nxt.append(s)
            cells = nxt
        out = set()
        for t in cells:
            p = sample_term(t, self.dv)
            out.add(tuple(p[v] for v in self.dv))
        return sorted(out | set(verts))

    def suffix_set(self, pieces: Sequence, y: Sequence) -> frozenset:
        return frozenset(self.trajectory_word(pieces, y, d)[0] for d in self.witness_directions(pieces, y))

    # -- safe delays ------------------------------------------------------
    def safe_intervals(self, pieces: Sequence, y: Sequence, target: Iterable[str], avoid: Iterable[str],
                       direction: Sequence | None = None) -> list:
        """Delays landing in ``target`` with the whole prefix outside ``avoid``.

        With ``direction`` the single trajectory is used (perfect observation);
        otherwise all trajectories through ``y`` must comply.
        """
        target, avoid = set(target), set(avoid)
        ws = self.ray_windows(pieces, y, direction) if direction is not None else self.reach_windows(pieces, y)
        return safe_from_windows(ws, target, avoid)


def safe_from_windows(ws: list, target: set, avoid: set) -> list:
    out = []
    for iv, s in ws:
        if s & avoid:
            break
        if s and s <= target:
            out.append(iv)
    return merge_intervals(out)


@lru_cache(maxsize=512)
def _normals(pieces: tuple, dim: int) -> tuple:
    ys = yvars(dim)
    return tuple((tuple(Fraction(h.coeff(v)) for v in ys), Fraction(h.bound)) for h in base_hyperplanes(pieces))


@lru_cache(maxsize=512)
def _compiled(pieces: tuple, dim: int) -> tuple:
    """Pieces as sign conditions over the base hyperplanes (index, orientation, op)."""
    index = {h: i for i, h in enumerate(base_hyperplanes(pieces))}
    out = []
    for name, f in pieces:
        terms = []
        for t in f.terms:
            atoms = []
            for c in t:
                h = hyperplane(c)
                atoms.append((index[h], 1 if h.coeffs == c.coeffs else -1, c.op))
            terms.append(tuple(atoms))
        out.append((name, tuple(terms)))
    return tuple(out)


def _member(comp: tuple, signs: list) -> frozenset:
    out = []
    for name, terms in comp:
        for t in terms:
            for i, k, op in t:
                v = k * signs[i]
                if (v >= 0) if op == "<" else ((v > 0) if op == "<=" else v != 0):
                    break
            else:
                out.append(name)
                break
    return frozenset(out)


def base_hyperplanes(pieces: Sequence) -> list:
    seen = {}
    for _, f in pieces:
        for t in f.terms:
            for c in t:
                h = hyperplane(c)
                seen[h] = None
    return sorted(seen)
