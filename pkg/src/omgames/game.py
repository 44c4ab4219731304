"""Games with strong resets: structure, validation, concrete semantics and lifting."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

from .dynamics.affine import AffineCone, EngineError, UnsupportedQuery, dvars, yvars
from .dynamics.oracle import OracleDynamics
from .logic.constraints import Constraint, closure, make
from .logic.dnf import Dnf, sample_term, simplify_term, term_sat
from .sets import Partition, check_respects, check_well_formed, point_map, split_cells, DefSet


class Diagnostic(NamedTuple):
    severity: str  # "error" or "warning"
    message: str
    line: int = 0

    def __str__(self):
        where = f"line {self.line}: " if self.line else ""
        return f"{self.severity}: {where}{self.message}"


@dataclass(frozen=True)
class Transition:
    """``src -> dst`` on ``guard`` with ``action``, resetting into ``reset``.

    Guards and resets are formulas at affine locations and frozensets of cell
    names at oracle locations.
    """

    src: str
    guard: object
    action: str
    reset: object
    dst: str
    line: int = 0


class GameState(NamedTuple):
    location: str
    y: tuple


class ExtendedState(NamedTuple):
    """A state plus the trajectory witness through it (direction or oracle parameter)."""

    location: str
    y: tuple
    witness: object = None
    offset: Fraction = Fraction(0)

    def observed(self) -> GameState:
        return GameState(self.location, self.y)


def zero_dynamics(dim: int) -> AffineCone:
    eng = AffineCone(dim, Dnf.conj([make({d: 1}, "=", 0) for d in dvars(dim)]))
    eng.implicit = True  # not declared in the game file
    return eng


@dataclass
class MGame:
    dim: int
    locations: list
    goal: set
    controllable: list
    uncontrollable: list
    transitions: list = field(default_factory=list)
    dynamics: dict = field(default_factory=dict)
    domains: dict = field(default_factory=dict)
    explicit: dict = field(default_factory=dict)
    init: GameState | None = None
    _partition: Partition | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for q in self.locations:
            if q not in self.dynamics:
                self.dynamics[q] = zero_dynamics(self.dim)

    @property
    def actions(self) -> list:
        return list(self.controllable) + list(self.uncontrollable)

    def engine(self, q: str):
        return self.dynamics[q]

    def is_oracle(self, q: str) -> bool:
        return isinstance(self.dynamics[q], OracleDynamics)

    def domain(self, q: str) -> Dnf:
        return self.domains.get(q, Dnf.true())

    def outgoing(self, q: str, action: str | None = None) -> list:
        return [t for t in self.transitions if t.src == q and (action is None or t.action == action)]

    def incoming(self, q: str) -> list:
        return [t for t in self.transitions if t.dst == q]

    def partition(self) -> Partition:
        if self._partition is None:
            self._partition = coarsest_game_partition(self)
        return self._partition

    # -- set-valued helpers ------------------------------------------------
    def guard_cells(self, tr: Transition) -> frozenset:
        eng = self.dynamics[tr.src]
        return frozenset(c for name in tr.guard for c in eng.groups.get(name, (name,)))

    def reset_cells(self, tr: Transition) -> frozenset:
        eng = self.dynamics[tr.dst]
        return frozenset(c for name in tr.reset for c in eng.groups.get(name, (name,)))

    def piece_respects_guard(self, eng, piece, tr: Transition) -> bool:
        if isinstance(eng, OracleDynamics):
            g = self.guard_cells(tr)
            cs = set(piece.cells)
            return cs <= g or not (cs & g)
        f = piece.formula
        return f.implies(tr.guard) or f.disjoint(tr.guard)

    # -- concrete semantics --------------------------------------------------
    def guard_holds(self, tr: Transition, y) -> bool:
        eng = self.dynamics[tr.src]
        if isinstance(eng, OracleDynamics):
            return eng.classify_cell(y) in self.guard_cells(tr)
        return tr.guard.holds(point_map(y))

    def enabled_transitions(self, q: str, y, action: str | None = None) -> list:
        return [t for t in self.outgoing(q, action) if self.guard_holds(t, y)]

    def advance(self, q: str, y, witness, tau) -> tuple:
        eng = self.dynamics[q]
        tau = Fraction(tau)
        if isinstance(eng, OracleDynamics):
            return tuple(Fraction(v) for v in eng._need_model().advance(y, witness, tau))
        d = witness if witness is not None else eng.point
        if d is None:
            raise EngineError("a trajectory witness is needed for nondeterministic dynamics")
        return tuple(Fraction(a) + tau * Fraction(b) for a, b in zip(y, d))

    def witness_candidates(self, q: str, y, pieces=None, horizon=None) -> list:
        eng = self.dynamics[q]
        if isinstance(eng, OracleDynamics):
            return list(eng._need_model().witnesses(y, horizon))
        if eng.deterministic:
            return [eng.point]
        return list(eng.witness_directions(pieces if pieces is not None else _pieces_at(self, q), tuple(y)))

    def random_witness(self, q: str, y, rng: random.Random):
        eng = self.dynamics[q]
        if isinstance(eng, OracleDynamics):
            ws = eng._need_model().witnesses(y)
            if len(ws) > 1:
                # continuous parameter families get a fresh rational sample
                lo, hi = min(ws), max(ws)
                return lo + (hi - lo) * Fraction(rng.randint(0, 1000), 1000)
            return ws[0]
        if eng.deterministic:
            return eng.point
        p = sample_term(eng.term, eng.dv, rng)
        return tuple(p[v] for v in eng.dv)

    def sample_reset(self, tr: Transition, rng: random.Random, region: Dnf | None = None):
        eng = self.dynamics[tr.dst]
        if isinstance(eng, OracleDynamics):
            cells = sorted(self.reset_cells(tr))
            return tuple(eng._need_model().sample(rng.choice(cells), rng))
        f = tr.reset & self.domain(tr.dst)
        if region is not None:
            f = f & region
        pt = f.sample(yvars(self.dim), rng)
        if pt is None:
            raise EngineError(f"empty reset target on {tr.src} -> {tr.dst}")
        return tuple(pt[v] for v in yvars(self.dim))

    def enabled(self, es: ExtendedState, tau, action: str) -> bool:
        """Following the witness of ``es`` for ``tau`` lands in a guard of ``action``."""
        y2 = self.advance(es.location, es.y, es.witness, tau)
        return bool(self.enabled_transitions(es.location, y2, action))


def _pieces_at(game: MGame, q: str) -> list:
    return list(game.partition().pieces[q])


# ------------------------------------------------------------------ validation

def validate(g: MGame) -> list:
    out = []
    if not g.locations:
        return [Diagnostic("error", "no locations")]
    if len(set(g.locations)) != len(g.locations):
        out.append(Diagnostic("error", "duplicate location names"))
    both = set(g.controllable) & set(g.uncontrollable)
    for a in sorted(both):
        out.append(Diagnostic("error", f"action {a} is both controllable and uncontrollable"))
    if not g.goal:
        out.append(Diagnostic("warning", "Goal is empty: no state is winning"))
    for q in sorted(set(g.goal) - set(g.locations)):
        out.append(Diagnostic("error", f"goal location {q} is not declared"))
    for q in g.locations:
        eng = g.dynamics[q]
        if isinstance(eng, AffineCone):
            if eng.dim != g.dim:
                out.append(Diagnostic("error", f"dynamics of {q} has dimension {eng.dim}, game has {g.dim}"))
            dom = g.domain(q)
            if not dom.is_sat():
                out.append(Diagnostic("error", f"state space of {q} is empty"))
            elif q in g.domains and not _forward_invariant(eng, dom):
                out.append(Diagnostic("error", f"trajectories leave the declared state space of {q}"))
        else:
            for m in eng.diagnostics():
                out.append(Diagnostic("error", f"{q}: {m}"))
            if eng.model is not None and eng.model.dim != g.dim:
                out.append(Diagnostic("error", f"oracle model of {q} has dimension {eng.model.dim}"))
    ys = set(yvars(g.dim))
    for t in g.transitions:
        where = f"transition {t.src} -> {t.dst} ({t.action})"
        if t.src not in g.locations or t.dst not in g.locations:
            out.append(Diagnostic("error", f"{where}: unknown location", t.line))
            continue
        if t.action not in g.actions:
            out.append(Diagnostic("error", f"{where}: undeclared action {t.action}", t.line))
        src, dst = g.dynamics[t.src], g.dynamics[t.dst]
        if isinstance(src, OracleDynamics):
            unknown = [n for n in t.guard if n not in src.groups and n not in src.cells]
            if unknown:
                out.append(Diagnostic("error", f"{where}: unknown guard pieces {unknown}", t.line))
            elif not t.guard:
                out.append(Diagnostic("warning", f"{where}: empty guard, never enabled", t.line))
            else:
                cells = g.guard_cells(t)
                for p, cs in src.groups.items():
                    if set(cs) & cells and not set(cs) <= cells:
                        out.append(Diagnostic("error", f"{where}: guard splits oracle piece {p}", t.line))
        else:
            extra = t.guard.variables - ys
            if extra:
                out.append(Diagnostic("error", f"{where}: guard uses {sorted(extra)}", t.line))
            elif not (t.guard & g.domain(t.src)).is_sat():
                out.append(Diagnostic("warning", f"{where}: empty guard, never enabled", t.line))
        if isinstance(dst, OracleDynamics):
            unknown = [n for n in t.reset if n not in dst.groups and n not in dst.cells]
            if unknown:
                out.append(Diagnostic("error", f"{where}: unknown reset cells {unknown}", t.line))
            elif not t.reset:
                out.append(Diagnostic("error", f"{where}: empty reset target (no successor state - "
                                               "transition can never fire soundly)", t.line))
        else:
            extra = t.reset.variables - ys
            if extra:
                out.append(Diagnostic("error", f"{where}: reset is not a constant set over "
                                               f"{sorted(ys)} (uses {sorted(extra)})", t.line))
            elif not (t.reset & g.domain(t.dst)).is_sat():
                out.append(Diagnostic("error", f"{where}: empty reset target (no successor state - "
                                               "transition can never fire soundly)", t.line))
    if not any(d.severity == "error" for d in out):
        for q, items in g.explicit.items():
            p = Partition(g.dim, {q: tuple(items)})
            for m in check_well_formed(p, {q: g.domain(q)}):
                out.append(Diagnostic("error", f"explicit partition: {m}"))
            for s in _generating_sets(g, q):
                if not check_respects(p, DefSet({q: s})):
                    out.append(Diagnostic("error", f"explicit partition of {q} splits a guard or reset"))
                    break
    return out


def _forward_invariant(eng: AffineCone, dom: Dnf) -> bool:
    from .dynamics.affine import TAU

    stay = Dnf.atom(make({TAU: 1}, "<", 0)) | eng.all_reach_formula(dom)
    return dom.implies(stay.forall([TAU]))


# ------------------------------------------------------------------ partitions

def _generating_sets(g: MGame, q: str) -> list:
    out = []
    for t in g.outgoing(q):
        if isinstance(t.guard, Dnf):
            out.append(t.guard)
    for t in g.incoming(q):
        if isinstance(t.reset, Dnf):
            out.append(t.reset)
    seen, uniq = set(), []
    for f in out:
        if f not in seen:
            seen.add(f)
            uniq.append(f)
    return uniq


def connected_components(f: Dnf, variables: Sequence[str]) -> list:
    """Split a set into connected components (convex terms glued along closures)."""
    terms = [t for t in f.terms if term_sat(t)]
    parent = list(range(len(terms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    closed = [frozenset(closure(c) for c in t) for t in terms]
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            if find(i) == find(j):
                continue
            if _meet(closed[i], terms[j]) or _meet(terms[i], closed[j]):
                parent[find(i)] = find(j)
    groups: dict = {}
    for i, t in enumerate(terms):
        groups.setdefault(find(i), []).append(t)
    comps = [Dnf(ts) for ts in groups.values()]

    def key(c):
        pt = c.sample(variables)
        return tuple(pt[v] for v in variables)

    return sorted(comps, key=key)


def _meet(a, b) -> bool:
    s = simplify_term(a | b)
    return s is not None and term_sat(s)


def coarsest_game_partition(g: MGame) -> Partition:
    """P_A: cells of the guards and reset targets at each location, split into components.

    Names are ``p`` followed by the membership bits over the generating sets
    and, when a cell is disconnected, ``_k`` for its k-th component.
    Oracle locations use their own pieces; explicit partitions override.
    Goal locations are one piece: play stops there, so no set needs respecting.
    """
    ys = yvars(g.dim)
    out = {}
    for q in g.locations:
        eng = g.dynamics[q]
        if isinstance(eng, OracleDynamics):
            out[q] = tuple((p, None) for p in eng.pieces)
            continue
        if q in g.explicit:
            out[q] = tuple(g.explicit[q])
            continue
        if q in g.goal:
            out[q] = (("p", g.domain(q)),)
            continue
        cells = [("", g.domain(q))]
        for s in _generating_sets(g, q):
            cells = split_cells(cells, s)
        pieces = []
        for sig, f in sorted(cells, key=lambda c: c[0], reverse=True):
            comps = connected_components(f.simplify(), ys)
            base = "p" + sig if sig else "p"
            if len(comps) == 1:
                pieces.append((base, comps[0]))
            else:
                pieces += [(f"{base}_{i + 1}", c) for i, c in enumerate(comps)]
        out[q] = tuple(pieces)
    return Partition(g.dim, out)


# ------------------------------------------------------------------ lifting

def perfect_to_partial_transform(g: MGame, s: GameState | None = None):
    """Expose the trajectory direction in the state: ``(y, d)`` of dimension 2n.

    Only deterministic affine dynamics are lifted here: with a single
    direction per location the lifted flow is again an affine cone,
    ``D' = {(d0, 0)}``.  Nondeterministic directions make the lifted flow
    bilinear, which the linear engines cannot express.
    """
    n = g.dim
    if any(isinstance(e, OracleDynamics) for e in g.dynamics.values()):
        raise UnsupportedQuery("oracle engines are solved in perfect mode natively")
    if not all(e.deterministic for e in g.dynamics.values()):
        raise UnsupportedQuery("nondeterministic directions make the lifted dynamics bilinear; "
                               "use the piece-level lift of the solver")
    ys2 = yvars(2 * n)
    dims = ys2[n:]
    dyn, doms = {}, {}
    for q in g.locations:
        d0 = g.dynamics[q].point
        dv = dvars(2 * n)
        cons = [make({dv[i]: 1}, "=", d0[i]) for i in range(n)] + [make({dv[n + i]: 1}, "=", 0) for i in range(n)]
        dyn[q] = AffineCone(2 * n, Dnf.conj(cons))
        doms[q] = g.domain(q) & _direction_set(g.dynamics[q], dims)
    trs = []
    for t in g.transitions:
        trs.append(Transition(t.src, t.guard, t.action, t.reset & _direction_set(g.dynamics[t.dst], dims),
                              t.dst, t.line))
    g2 = MGame(2 * n, list(g.locations), set(g.goal), list(g.controllable), list(g.uncontrollable), trs, dyn,
               doms, {})
    s2 = None
    if s is not None:
        s2 = GameState(s.location, tuple(s.y) + tuple(g.dynamics[s.location].point))
    return g2, s2


def _direction_set(eng: AffineCone, names: Sequence[str]) -> Dnf:
    return eng.D.rename(dict(zip(eng.dv, names)))


def project_directions(g: MGame, lifted: Mapping[str, Dnf]) -> dict:
    """``{y | every direction d in D gives a lifted winning state (y, d)}`` per location."""
    n = g.dim
    dims = yvars(2 * n)[n:]
    out = {}
    for q in g.locations:
        w = lifted.get(q, Dnf.false())
        dset = _direction_set(g.dynamics[q], dims)
        out[q] = (g.domain(q) & (~dset | w).forall(dims)).simplify()
    return out
