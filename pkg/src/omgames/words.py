"""Suffix and superword abstractions, their induced partitions, and stability checks.

Words are spelled over the pieces of a base partition.  For affine-cone
engines the induced partitions are computed exactly: every base piece is cut
into the faces of a hyperplane arrangement on which the label is provably
constant, each face is labelled at one sample point, and faces with equal
labels are merged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from .dynamics.affine import TAU, AffineCone, EngineError, UnsupportedQuery, base_hyperplanes, yvars
from .dynamics.oracle import OracleDynamics
from .logic.constraints import Constraint, make
from .logic.dnf import Dnf, sample_term, simplify_term, term_sat
from .sets import PartitionError, point_map
from .wordtypes import Superword, format_word_set


@dataclass(frozen=True)
class LabeledPiece:
    name: str
    base: str
    formula: Dnf | None = None
    cells: tuple = ()
    suffix: frozenset | None = None
    superword: Superword | None = None

    def label_text(self) -> str:
        parts = []
        if self.suffix is not None:
            parts.append(format_word_set(self.suffix))
        if self.superword is not None:
            parts.append(str(self.superword))
        return " ".join(parts)


@dataclass(frozen=True)
class LabeledPartition:
    """Per location, the labelled refinement of the base partition."""

    dim: int
    kind: str
    pieces: Mapping[str, tuple] = field(default_factory=dict)
    engines: Mapping[str, object] = field(default_factory=dict, compare=False)
    # the base (name, formula) pieces the labels were computed against
    base: Mapping[str, tuple] = field(default_factory=dict, compare=False, repr=False)
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def names(self, q: str) -> list:
        return [p.name for p in self.pieces[q]]

    def piece(self, q: str, name: str) -> LabeledPiece:
        for p in self.pieces[q]:
            if p.name == name:
                return p
        raise KeyError(f"no labelled piece {name} at {q}")

    def size(self) -> int:
        return sum(len(v) for v in self.pieces.values())

    def refs(self) -> list:
        return [(q, p.name) for q in self.pieces for p in self.pieces[q]]

    def classify(self, q: str, y) -> LabeledPiece:
        key = (q, tuple(y))
        hit = self._memo.get(key)
        if hit is None:
            if len(self._memo) > 50000:
                self._memo.clear()
            hit = self._memo[key] = self._classify(q, y)
        return hit

    def _classify(self, q: str, y) -> LabeledPiece:
        items = self.pieces[q]
        eng = self.engines.get(q)
        if isinstance(eng, OracleDynamics):
            cell = eng.classify_cell(y)
            for p in items:
                if cell in p.cells:
                    return p
            raise PartitionError(f"cell {cell} at {q} lies in no piece")
        pt = point_map(y)
        for p in items:
            if p.formula.holds(pt):
                return p
        raise PartitionError(f"point {y} at {q} lies in no piece")

    def base_of(self, q: str) -> dict:
        return {p.name: p.base for p in self.pieces[q]}


# ----------------------------------------------------------------- pointwise

def suffix_abstraction(engine, pieces: Sequence, y) -> frozenset:
    """Suf_P(y); ``pieces`` are ``(name, Dnf)`` pairs (ignored by oracle engines)."""
    if isinstance(engine, OracleDynamics):
        return engine.suffix[engine.classify_cell(y)]
    return engine.suffix_set(pieces, tuple(Fraction(v) for v in y))


def superword(engine, pieces: Sequence, y) -> Superword:
    if isinstance(engine, OracleDynamics):
        cell = engine.classify_cell(y)
        if cell in engine.superword_label:
            return engine.superword_label[cell]
        raise UnsupportedQuery(f"no superword label for cell {cell}")
    return engine.superword(pieces, tuple(Fraction(v) for v in y))


# ----------------------------------------------------------------- arrangements

def _sides(h: Constraint) -> tuple:
    coeffs = dict(h.coeffs)
    neg = {v: -k for v, k in coeffs.items()}
    return (make(coeffs, "<", h.bound), make(coeffs, "=", h.bound), make(neg, "<", -h.bound))


def _value(h: Constraint, pt) -> Fraction:
    return sum(k * pt[v] for v, k in h.coeffs) - h.bound


def arrangement_faces(region: Dnf, cuts: Sequence[Constraint], variables: Sequence[str]) -> list:
    """Faces (as conjunctions) of the arrangement of hyperplanes ``cuts`` inside ``region``."""
    cells = []
    for t in region.terms:
        if term_sat(t):
            cells.append((t, sample_term(t, variables)))
    for h in cuts:
        sides = _sides(h)
        nxt = []
        for t, pt in cells:
            v = _value(h, pt)
            here = 0 if v < 0 else (1 if v == 0 else 2)
            for i, c in enumerate(sides):
                if i == here:
                    nxt.append((t if c is True else simplify_term(t | {c}), pt))
                    continue
                if c is False:
                    continue
                s = t if c is True else simplify_term(t | {c})
                if s is not None and term_sat(s):
                    nxt.append((s, sample_term(s, variables)))
        cells = nxt
    return cells


def _dedupe(cuts) -> list:
    out = {}
    for h in cuts:
        if isinstance(h, Constraint) and h.coeffs:
            out[h] = None
    return sorted(out)


def _line(normal, point) -> Constraint | None:
    ys = yvars(len(normal))
    coeffs = {y: a for y, a in zip(ys, normal) if a}
    if not coeffs:
        return None
    h = make(coeffs, "=", sum(a * p for a, p in zip(normal, point)))
    return h if isinstance(h, Constraint) else None


def _vertices_2d(hs: list) -> list:
    out = set()
    for h1, h2 in combinations(hs, 2):
        a1, a2 = Fraction(h1.coeff("y1")), Fraction(h1.coeff("y2"))
        b1, b2 = Fraction(h2.coeff("y1")), Fraction(h2.coeff("y2"))
        det = a1 * b2 - a2 * b1
        if det == 0:
            continue
        c1, c2 = Fraction(h1.bound), Fraction(h2.bound)
        out.add(((c1 * b2 - a2 * c2) / det, (a1 * c2 - c1 * b1) / det))
    return sorted(out)


def _genuine(v, pieces, hs) -> bool:
    """Whether the partition is locally more than a single line around ``v``."""
    through = [h for h in hs if _value(h, {"y1": v[0], "y2": v[1]}) == 0]
    others = [h for h in hs if h not in through]
    eps = Fraction(1)
    for h in others:
        a = abs(h.coeff("y1")) + abs(h.coeff("y2"))
        eps = min(eps, abs(_value(h, {"y1": v[0], "y2": v[1]})) / (2 * a))
    dirs = []
    for h in through:
        d = (Fraction(-h.coeff("y2")), Fraction(h.coeff("y1")))
        m = max(abs(d[0]), abs(d[1]))
        dirs += [(d[0] / m, d[1] / m), (-d[0] / m, -d[1] / m)]
    dirs = sorted(set(dirs), key=_angle_key)
    probes = list(dirs)
    for i, d in enumerate(dirs):
        e = dirs[(i + 1) % len(dirs)]
        s = (d[0] + e[0], d[1] + e[1])
        if s == (0, 0):
            s = (-d[1], d[0])
        m = max(abs(s[0]), abs(s[1]))
        probes.append((s[0] / m, s[1] / m))

    def label(w):
        pt = {"y1": v[0] + eps * w[0], "y2": v[1] + eps * w[1]}
        return tuple(f.holds(pt) for _, f in pieces)

    centre = tuple(f.holds({"y1": v[0], "y2": v[1]}) for _, f in pieces)
    labels = [(w, label(w)) for w in probes]
    for h in [None] + through:
        groups: dict = {}
        ok = True
        for w, lab in labels:
            s = 0 if h is None else _sign(h.coeff("y1") * w[0] + h.coeff("y2") * w[1])
            if s == 0 and lab != centre and h is not None:
                ok = False
                break
            if groups.setdefault(s, lab) != lab:
                ok = False
                break
        if ok and (h is not None or groups.get(0, centre) == centre):
            return False
    return True


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _angle_key(d):
    x, y = d
    half = 0 if (y > 0 or (y == 0 and x > 0)) else 1
    # within a half plane, order by the cotangent
    return (half, -x / (abs(x) + abs(y)) if half == 0 else x / (abs(x) + abs(y)))


def _in_double_cone(engine: AffineCone, direction) -> bool:
    dv = engine.dv
    cross = make({dv[0]: direction[1], dv[1]: -direction[0]}, "=", 0)
    base = set(engine.term)
    if cross is False:
        return False
    if cross is not True:
        base.add(cross)
    dotc = {v: k for v, k in zip(dv, direction) if k}
    for c in (make(dotc, "<", 0), make({v: -k for v, k in dotc.items()}, "<", 0)):
        if c is True or (c is not False and (t := simplify_term(base | {c})) is not None and term_sat(t)):
            return True
    return False


def suffix_cuts(engine: AffineCone, pieces: Sequence) -> list:
    """Hyperplanes whose arrangement makes Suf_P constant on every face."""
    hs = base_hyperplanes(pieces)
    n = engine.dim
    ys = yvars(n)
    cuts = list(hs)
    if engine.deterministic:
        d = engine.point
        for h1, h2 in combinations(hs, 2):
            a = [Fraction(h1.coeff(v)) for v in ys]
            b = [Fraction(h2.coeff(v)) for v in ys]
            ad = sum(x * y for x, y in zip(a, d))
            bd = sum(x * y for x, y in zip(b, d))
            if ad == 0 or bd == 0:
                continue
            # equal crossing times: (h1.bound - a.y) * bd = (h2.bound - b.y) * ad
            coeffs = {v: -ai * bd + bi * ad for v, ai, bi in zip(ys, a, b)}
            coeffs = {v: k for v, k in coeffs.items() if k}
            if coeffs:
                cuts.append(make(coeffs, "=", -Fraction(h1.bound) * bd + Fraction(h2.bound) * ad))
        return _dedupe(cuts)
    if n == 1:
        return _dedupe(cuts)
    if n != 2:
        raise UnsupportedQuery("suffix partitions with nondeterministic directions need dimension <= 2")
    verts = [v for v in _vertices_2d(hs) if _genuine(v, pieces, hs)]
    normals = []
    for e in engine.vertices():
        if any(e):
            normals.append((-e[1], e[0]))
    for h in hs:
        dirn = (Fraction(-h.coeff("y2")), Fraction(h.coeff("y1")))
        if _in_double_cone(engine, dirn):
            normals.append((-dirn[1], dirn[0]))
    for v in verts:
        for nrm in normals:
            cuts.append(_line(nrm, v))
    for v, w in combinations(verts, 2):
        dirn = (w[0] - v[0], w[1] - v[1])
        if _in_double_cone(engine, dirn):
            cuts.append(_line((-dirn[1], dirn[0]), v))
    return _dedupe(cuts)


def superword_cuts(engine: AffineCone, pieces: Sequence) -> list:
    """Hyperplanes fixing the combinatorics of every reach formula's tau-intervals."""
    n = engine.dim
    ys = yvars(n)
    ends = set()
    cuts = list(base_hyperplanes(pieces))
    for _, f in pieces:
        for term in engine.reach_formula(f).terms:
            for c in term:
                k = c.coeff(TAU)
                if k == 0:
                    if c.coeffs:
                        cuts.append(make(dict(c.coeffs), "=", c.bound))
                    continue
                # tau op (bound - sum others) / k
                e = tuple(Fraction(-c.coeff(v), k) for v in ys) + (Fraction(c.bound, k),)
                ends.add(e)
    ends = sorted(ends)
    for e in ends:
        h = _affine_cut(e, (Fraction(0),) * (n + 1))
        if h is not None:
            cuts.append(h)
    for e1, e2 in combinations(ends, 2):
        h = _affine_cut(e1, e2)
        if h is not None:
            cuts.append(h)
    return _dedupe(cuts)


def _affine_cut(e1, e2):
    n = len(e1) - 1
    ys = yvars(n)
    coeffs = {v: a - b for v, a, b in zip(ys, e1, e2) if a != b}
    if not coeffs:
        return None
    h = make(coeffs, "=", e2[-1] - e1[-1])
    return h if isinstance(h, Constraint) else None


# ----------------------------------------------------------------- partitions

def _group(base: str, faces: list, key, make_piece) -> list:
    groups: dict = {}
    for term, lab in faces:
        groups.setdefault(key(lab), (lab, []))[1].append(term)
    ordered = sorted(groups.values(), key=lambda item: key(item[0]))
    out = []
    for i, (lab, terms) in enumerate(ordered):
        name = base if len(ordered) == 1 else f"{base}.{i + 1}"
        out.append(make_piece(name, Dnf(frozenset(terms)), lab))
    return out


def _face_labels(engine: AffineCone, pieces: Sequence, cuts, labeler) -> list:
    ys = yvars(engine.dim)
    out = []
    for name, f in pieces:
        faces = []
        for term, pt in arrangement_faces(f, [h for h in cuts if _meets(h, f)], ys):
            y = tuple(pt[v] for v in ys)
            faces.append((term, labeler(y)))
        out.append((name, faces))
    return out


def _meets(h: Constraint, f: Dnf) -> bool:
    return any((t := simplify_term(tt | {h})) is not None and term_sat(t) for tt in f.terms)


def _suffix_key(lab):
    return tuple(sorted(str(w) for w in lab))


def _super_key(lab):
    return str(lab)


def location_suffix_partition(engine, pieces: Sequence) -> tuple:
    """Suf(P) at one location; ``pieces`` are the base ``(name, Dnf)`` pairs."""
    if isinstance(engine, OracleDynamics):
        return _oracle_partition(engine, "suffix")
    cuts = suffix_cuts(engine, pieces)
    out = []
    for name, faces in _face_labels(engine, pieces, cuts, lambda y: engine.suffix_set(pieces, y)):
        out += _group(name, faces, _suffix_key,
                      lambda n, f, lab, b=name: LabeledPiece(n, b, f, suffix=lab))
    return tuple(out)


def location_superword_partition(engine, pieces: Sequence) -> tuple:
    if isinstance(engine, OracleDynamics):
        return _oracle_partition(engine, "superword")
    if engine.deterministic:
        # a single trajectory: the superword is the word with singleton letters
        out = []
        for p in location_suffix_partition(engine, pieces):
            (w,) = p.suffix
            sw = engine.superword(pieces, tuple(sample_term(next(iter(p.formula.terms)), yvars(engine.dim))[v]
                                                for v in yvars(engine.dim)))
            out.append(LabeledPiece(p.name, p.base, p.formula, suffix=p.suffix, superword=_letters_only(sw)))
        return tuple(out)
    cuts = superword_cuts(engine, pieces)
    out = []
    for name, faces in _face_labels(engine, pieces, cuts, lambda y: _letters_only(engine.superword(pieces, y))):
        out += _group(name, faces, _super_key,
                      lambda n, f, lab, b=name: LabeledPiece(n, b, f, superword=lab))
    return tuple(out)


def _letters_only(sw: Superword) -> Superword:
    return Superword(sw.letters)


def _oracle_partition(engine: OracleDynamics, kind: str) -> tuple:
    out = []
    for base in engine.pieces:
        cells = engine.groups[base]
        groups: dict = {}
        for c in cells:
            if kind == "suffix":
                lab = engine.suffix.get(c)
                if lab is None:
                    raise UnsupportedQuery(f"no suffix label for cell {c}")
                key = _suffix_key(lab)
            else:
                lab = engine.superword_label.get(c)
                if lab is None:
                    raise UnsupportedQuery(f"no superword label for cell {c}")
                key = _super_key(lab)
            groups.setdefault(key, (lab, []))[1].append(c)
        ordered = sorted(groups.items())
        for i, (_, (lab, cs)) in enumerate(ordered):
            name = base if len(ordered) == 1 else f"{base}.{i + 1}"
            if kind == "suffix":
                out.append(LabeledPiece(name, base, None, tuple(cs), suffix=lab,
                                        superword=_common_superword(engine, cs)))
            else:
                out.append(LabeledPiece(name, base, None, tuple(cs), superword=lab,
                                        suffix=_common_suffix(engine, cs)))
    return tuple(out)


def _common_superword(engine, cells):
    labs = {engine.superword_label.get(c) for c in cells}
    return labs.pop() if len(labs) == 1 else None


def _common_suffix(engine, cells):
    labs = {engine.suffix.get(c) for c in cells}
    return labs.pop() if len(labs) == 1 else None


def game_pieces(partition, q: str) -> list:
    return list(partition.pieces[q])


def suffix_partition(game, partition=None) -> LabeledPartition:
    """Suf(P) for every location of ``game`` (default base: the game partition)."""
    return _game_partition(game, partition, "suffix")


def superword_partition(game, partition=None) -> LabeledPartition:
    return _game_partition(game, partition, "superword")


def base_labeled_partition(game, partition=None) -> LabeledPartition:
    """The base partition itself, one unlabelled piece per base piece."""
    partition = partition or game.partition()
    out = {}
    for q in game.locations:
        eng = game.dynamics[q]
        items = []
        for name, f in partition.pieces.get(q, ()):
            if isinstance(eng, OracleDynamics):
                items.append(LabeledPiece(name, name, None, tuple(eng.groups[name])))
            else:
                items.append(LabeledPiece(name, name, f))
        out[q] = tuple(items)
    return LabeledPartition(game.dim, "base", out, dict(game.dynamics))


def _game_partition(game, partition, kind) -> LabeledPartition:
    partition = partition or game.partition()
    out = {}
    for q in game.locations:
        eng = game.dynamics[q]
        pieces = list(partition.pieces[q]) if q in partition.pieces else []
        fn = location_suffix_partition if kind == "suffix" else location_superword_partition
        out[q] = fn(eng, pieces)
    base = {q: tuple(v) for q, v in partition.pieces.items()}
    return LabeledPartition(game.dim, kind, out, dict(game.dynamics), base)


# ----------------------------------------------------------------- stability

def _as_pieces(items) -> list:
    return [(p.name, p.formula) for p in items]


def is_suffix_stable(lp: LabeledPartition) -> bool:
    """Whether recomputing Suf over the labelled pieces themselves splits nothing."""
    return _stable(lp, "suffix")


def is_superword_stable(lp: LabeledPartition) -> bool:
    return _stable(lp, "superword")


def _stable(lp: LabeledPartition, kind: str) -> bool:
    for q, items in lp.pieces.items():
        eng = lp.engines[q]
        if isinstance(eng, OracleDynamics):
            if not _oracle_stable(eng, items, kind):
                return False
            continue
        pieces = _as_pieces(items)
        fn = location_suffix_partition if kind == "suffix" else location_superword_partition
        if len(fn(eng, pieces)) != len(items):
            return False
    return True


def _oracle_stable(eng: OracleDynamics, items, kind: str) -> bool:
    if any(len(p.cells) != len(eng.groups[p.base]) for p in items):
        raise UnsupportedQuery("oracle labels are spelled over the base pieces only; "
                               "stability of a strict refinement is not decidable from them")
    for p in items:
        labs = {eng.suffix.get(c) if kind == "suffix" else eng.superword_label.get(c) for c in p.cells}
        if len(labs) != 1:
            return False
    return True


def _letters(words) -> frozenset:
    out = set()
    for w in words:
        out.update(w.positions())
    return frozenset(out)


def check_time_abstract_bisim(lp: LabeledPartition, game) -> bool:
    """Piece-level time-abstract bisimulation check.

    Discrete steps: every piece lies inside or outside each guard (strong
    resets make the successor set independent of the source point).  Time
    steps: all states of a piece time-reach the same set of pieces.
    """
    for q, items in lp.pieces.items():
        eng = lp.engines[q]
        for tr in game.outgoing(q):
            for p in items:
                if not game.piece_respects_guard(eng, p, tr):
                    return False
        if isinstance(eng, OracleDynamics):
            if any(len(p.cells) != len(eng.groups[p.base]) for p in items):
                raise UnsupportedQuery("oracle labels are spelled over the base pieces only")
            for p in items:
                if len({_letters(eng.suffix[c]) for c in p.cells}) != 1:
                    return False
            continue
        pieces = _as_pieces(items)
        cuts = suffix_cuts(eng, pieces)
        for name, faces in _face_labels(eng, pieces, cuts, lambda y: _letters(eng.suffix_set(pieces, y))):
            if len({lab for _, lab in faces}) > 1:
                return False
    return True


def check_label_constancy(lp: LabeledPartition, q: str, samples: int = 100, seed: int = 0) -> list:
    """Sample points of every affine piece and report those whose label differs."""
    import random

    rng = random.Random(seed)
    eng = lp.engines[q]
    base_pieces = _base_pieces_of(lp, q)
    bad = []
    ys = yvars(lp.dim)
    for p in lp.pieces[q]:
        terms = sorted(p.formula.terms, key=lambda t: sorted(map(str, t)))
        for i in range(samples):
            t = terms[i % len(terms)]
            pt = sample_term(t, ys, rng)
            y = tuple(pt[v] for v in ys)
            if p.suffix is not None and eng.suffix_set(base_pieces, y) != p.suffix:
                bad.append((p.name, y))
            if p.superword is not None and _letters_only(eng.superword(base_pieces, y)) != p.superword:
                bad.append((p.name, y))
    return bad


def _base_pieces_of(lp: LabeledPartition, q: str) -> list:
    if q in lp.base:
        return list(lp.base[q])
    merged: dict = {}
    for p in lp.pieces[q]:
        merged[p.base] = merged.get(p.base, Dnf.false()) | p.formula
    return list(merged.items())
