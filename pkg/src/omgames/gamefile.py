"""The line-oriented ``.mgame`` format: parsing with positioned diagnostics and serialization.

Statements (``#`` starts a comment)::

    dim 2
    location q1 [goal]
    action c controllable | action u uncontrollable
    domain q1 <formula over y1..yn>
    dynamics q1 affine_cone { <formula over d1..dn> }
    dynamics q1 oracle { pieces A B; group C = Ci Co; suffix A = A(BC), AB;
                         superword A = {A}{B,C}; crossing spiral|mod2|table|static CELL;
                         trajectory up = Y[0,0] A(0,3/2) B[3/2,inf) }
    partition q1 { name : <formula> ... }
    transition q0 -> q1 when <formula | piece names> do c [reset <formula | piece names>]
    init q1 0 1/2

Braced blocks may span lines; inside them statements are separated by
newlines or ``;``.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .dynamics.affine import AffineCone, EngineError, dvars, yvars
from .dynamics.oracle import MODELS, OracleDynamics, StaticModel, TableModel
from .game import Diagnostic, GameState, MGame, Transition, validate
from .logic.dnf import Dnf
from .logic.intervals import Interval
from .logic.syntax import ParseError, format_dnf, format_rational, parse_dnf
from .wordtypes import WordError, parse_superword, parse_word


class GameFileError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


def _statements(text: str):
    """Yield ``(line, statement)``; a braced block becomes one statement."""
    buf, start, depth = [], 0, 0
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if depth == 0:
            start = n
        depth += line.count("{") - line.count("}")
        buf.append(line)
        if depth < 0:
            raise GameFileError([Diagnostic("error", "unbalanced '}'", n)])
        if depth == 0:
            yield start, "\n".join(buf)
            buf = []
    if buf:
        raise GameFileError([Diagnostic("error", "unterminated '{' block", start)])


def _block(stmt: str) -> tuple:
    head, _, rest = stmt.partition("{")
    body = rest.rsplit("}", 1)[0]
    parts = [p.strip() for chunk in body.split("\n") for p in chunk.split(";")]
    return head.split(), [p for p in parts if p]


def _rational(s: str) -> Fraction:
    return Fraction(s.strip())


_SEGMENT = re.compile(r"(\w+)\s*([\[(])\s*([^,\])]+?)\s*,\s*([^,\])]+?)\s*([\])])")


def parse_segments(text: str) -> list:
    out = []
    pos = 0
    text = text.strip()
    for m in _SEGMENT.finditer(text):
        if text[pos:m.start()].strip():
            raise ValueError(f"cannot read trajectory segment near {text[pos:m.start()]!r}")
        pos = m.end()
        cell, lb, lo, hi, rb = m.groups()
        lo_v = _rational(lo)
        hi_v = None if hi.strip() in ("inf", "oo") else _rational(hi)
        out.append((Interval(lo_v, lb == "[", hi_v, rb == "]" and hi_v is not None), cell))
    if text[pos:].strip() or not out:
        raise ValueError(f"cannot read trajectory {text!r}")
    return out


def format_segments(segs) -> str:
    parts = []
    for iv, cell in segs:
        hi = "inf" if iv.hi is None else format_rational(iv.hi)
        parts.append(f"{cell}{'[' if iv.lo_closed else '('}{format_rational(iv.lo)},{hi}"
                     f"{']' if iv.hi_closed else ')'}")
    return " ".join(parts)


class _Oracle:
    def __init__(self):
        self.cells, self.groups, self.suffix, self.superword = [], {}, {}, {}
        self.crossing, self.trajectories = None, {}


def _parse_oracle(body, line, diags) -> _Oracle | None:
    o = _Oracle()
    for st in body:
        words = st.split()
        key = words[0]
        try:
            if key == "pieces":
                o.cells += words[1:]
            elif key == "group":
                name, _, rest = st[len("group"):].partition("=")
                o.groups[name.strip()] = rest.split()
            elif key == "suffix":
                cell, _, rest = st[len("suffix"):].partition("=")
                o.suffix[cell.strip()] = frozenset(parse_word(w) for w in rest.split(",") if w.strip())
            elif key == "superword":
                cell, _, rest = st[len("superword"):].partition("=")
                o.superword[cell.strip()] = parse_superword(rest.strip())
            elif key == "crossing":
                o.crossing = words[1:]
            elif key == "trajectory":
                name, _, rest = st[len("trajectory"):].partition("=")
                o.trajectories[name.strip()] = parse_segments(rest)
            else:
                diags.append(Diagnostic("error", f"unknown oracle statement {key!r}", line))
        except (WordError, ValueError) as e:
            diags.append(Diagnostic("error", f"oracle block: {e}", line))
    return o


def _build_oracle(o: _Oracle, dim: int, line: int, diags) -> OracleDynamics | None:
    model = None
    if o.crossing:
        kind = o.crossing[0]
        try:
            if kind in MODELS:
                model = MODELS[kind]()
            elif kind == "table":
                model = TableModel(o.trajectories)
            elif kind == "static":
                model = StaticModel(o.crossing[1] if len(o.crossing) > 1 else o.cells[0], dim)
            else:
                diags.append(Diagnostic("error", f"unknown crossing evaluator {kind!r}", line))
                return None
        except (EngineError, IndexError) as e:
            diags.append(Diagnostic("error", f"crossing evaluator: {e}", line))
            return None
    cells = list(o.cells)
    if model is not None and not cells:
        cells = list(model.cells) if hasattr(model, "cells") else []
    if not cells:
        diags.append(Diagnostic("error", "oracle dynamics declares no pieces", line))
        return None
    eng = OracleDynamics(cells, o.groups, o.suffix, o.superword, model)
    eng.declared = o
    return eng


def _names(text: str) -> frozenset:
    return frozenset(x for x in re.split(r"[\s,]+", text.strip()) if x)


def _formula(text: str, line: int, diags, what: str) -> Dnf | None:
    try:
        return parse_dnf(text)
    except (ParseError, ValueError) as e:
        diags.append(Diagnostic("error", f"{what}: {e}", line))
        return None


_TRANSITION = re.compile(r"^transition\s+(\S+)\s*->\s*(\S+)\s+when\s+(.+?)\s+do\s+(\S+)(?:\s+reset\s+(.+))?$", re.S)


def load_game(text: str) -> tuple:
    """``(game or None, diagnostics)``; the game is returned only when no error occurred."""
    diags: list = []
    dim = None
    locations, goal, ctrl, unc = [], set(), [], []
    raw_dyn, raw_dom, raw_part, raw_tr = {}, {}, {}, []
    init = None
    try:
        stmts = list(_statements(text))
    except GameFileError as e:
        return None, e.diagnostics
    for line, st in stmts:
        words = st.split()
        key = words[0]
        if key == "dim":
            if len(words) != 2 or not words[1].isdigit() or int(words[1]) < 1:
                diags.append(Diagnostic("error", "dim expects a positive integer", line))
            elif dim is not None:
                diags.append(Diagnostic("error", "duplicate dim", line))
            else:
                dim = int(words[1])
        elif key == "location":
            if len(words) not in (2, 3) or (len(words) == 3 and words[2] != "goal"):
                diags.append(Diagnostic("error", "expected 'location NAME [goal]'", line))
                continue
            if words[1] in locations:
                diags.append(Diagnostic("error", f"duplicate location {words[1]}", line))
                continue
            locations.append(words[1])
            if len(words) == 3:
                goal.add(words[1])
        elif key == "action":
            if len(words) != 3 or words[2] not in ("controllable", "uncontrollable"):
                diags.append(Diagnostic("error", "expected 'action NAME controllable|uncontrollable'", line))
                continue
            if words[1] in ctrl or words[1] in unc:
                diags.append(Diagnostic("error", f"duplicate action {words[1]}", line))
                continue
            (ctrl if words[2] == "controllable" else unc).append(words[1])
        elif key == "domain":
            if len(words) < 3:
                diags.append(Diagnostic("error", "expected 'domain LOCATION FORMULA'", line))
                continue
            raw_dom[words[1]] = (st.split(None, 2)[2], line)
        elif key == "dynamics":
            head, body = _block(st)
            if len(head) != 3 or head[2] not in ("affine_cone", "oracle") or "{" not in st:
                diags.append(Diagnostic("error", "expected 'dynamics LOCATION affine_cone|oracle { ... }'", line))
                continue
            if head[1] in raw_dyn:
                diags.append(Diagnostic("error", f"duplicate dynamics for {head[1]}", line))
                continue
            raw_dyn[head[1]] = (head[2], body, line)
        elif key == "partition":
            head, body = _block(st)
            if len(head) != 2:
                diags.append(Diagnostic("error", "expected 'partition LOCATION { name : formula ... }'", line))
                continue
            raw_part[head[1]] = (body, line)
        elif key == "transition":
            m = _TRANSITION.match(st)
            if not m:
                diags.append(Diagnostic("error", "expected 'transition SRC -> DST when GUARD do ACTION [reset SET]'",
                                        line))
                continue
            raw_tr.append((m.groups(), line))
        elif key == "init":
            if len(words) < 2:
                diags.append(Diagnostic("error", "expected 'init LOCATION v1 ... vn'", line))
                continue
            try:
                init = (GameState(words[1], tuple(_rational(v) for v in words[2:])), line)
            except (ValueError, ZeroDivisionError):
                diags.append(Diagnostic("error", "init coordinates must be rationals", line))
        else:
            diags.append(Diagnostic("error", f"unknown statement {key!r}", line))
    if not locations:
        diags.append(Diagnostic("error", "no locations"))
        return None, diags
    if dim is None:
        diags.append(Diagnostic("error", "missing 'dim'"))
        return None, diags
    ys, ds = set(yvars(dim)), set(dvars(dim))

    dynamics = {}
    for q, (kind, body, line) in raw_dyn.items():
        if q not in locations:
            diags.append(Diagnostic("error", f"dynamics for undeclared location {q}", line))
            continue
        if kind == "affine_cone":
            f = _formula(" & ".join(f"({b})" for b in body) or "true", line, diags, f"dynamics of {q}")
            if f is None:
                continue
            if not f.variables <= ds:
                diags.append(Diagnostic("error", f"dynamics of {q} may only use {sorted(ds)}", line))
                continue
            eng = AffineCone(dim, f)
            for m in eng.diagnostics():
                diags.append(Diagnostic("error", f"dynamics of {q}: {m}", line))
            dynamics[q] = eng
        else:
            o = _parse_oracle(body, line, diags)
            eng = _build_oracle(o, dim, line, diags)
            if eng is not None:
                dynamics[q] = eng

    domains = {}
    for q, (text_f, line) in raw_dom.items():
        if q not in locations:
            diags.append(Diagnostic("error", f"domain for undeclared location {q}", line))
            continue
        f = _formula(text_f, line, diags, f"domain of {q}")
        if f is not None:
            if not f.variables <= ys:
                diags.append(Diagnostic("error", f"domain of {q} may only use {sorted(ys)}", line))
            else:
                domains[q] = f

    explicit = {}
    for q, (body, line) in raw_part.items():
        if q not in locations:
            diags.append(Diagnostic("error", f"partition for undeclared location {q}", line))
            continue
        items = []
        for entry in body:
            name, sep, rest = entry.partition(":")
            if not sep or not name.strip():
                diags.append(Diagnostic("error", f"partition entry {entry!r} needs 'name : formula'", line))
                continue
            f = _formula(rest, line, diags, f"piece {name.strip()}")
            if f is not None:
                items.append((name.strip(), f))
        explicit[q] = items

    def _oracle_at(q):
        return isinstance(dynamics.get(q), OracleDynamics)

    transitions = []
    for (src, dst, guard, action, reset), line in raw_tr:
        g_val = _names(guard) if _oracle_at(src) else _formula(guard, line, diags, "guard")
        if reset is None:
            r_val = frozenset(dynamics[dst].cells) if _oracle_at(dst) else Dnf.true()
        else:
            r_val = _names(reset) if _oracle_at(dst) else _formula(reset, line, diags, "reset")
        if g_val is None or r_val is None:
            continue
        transitions.append(Transition(src, g_val, action, r_val, dst, line))

    if any(d.severity == "error" for d in diags):
        return None, diags
    g = MGame(dim, locations, goal, ctrl, unc, transitions, dynamics, domains, explicit)
    if init is not None:
        s, line = init
        if s.location not in locations or len(s.y) != dim:
            diags.append(Diagnostic("error", "init must name a location and give dim coordinates", line))
        else:
            g.init = s
    diags += validate(g)
    if any(d.severity == "error" for d in diags):
        return None, diags
    return g, diags


def parse_game(text: str) -> MGame:
    g, diags = load_game(text)
    if g is None:
        raise GameFileError(diags)
    return g


# ------------------------------------------------------------------ serialization

def _format_reset(eng, val) -> str:
    if isinstance(val, Dnf):
        return format_dnf(val)
    return " ".join(sorted(val))


def serialize_game(g: MGame) -> str:
    out = [f"dim {g.dim}"]
    for q in g.locations:
        out.append(f"location {q}" + (" goal" if q in g.goal else ""))
    for a in g.controllable:
        out.append(f"action {a} controllable")
    for a in g.uncontrollable:
        out.append(f"action {a} uncontrollable")
    for q in g.locations:
        if q in g.domains:
            out.append(f"domain {q} {format_dnf(g.domains[q])}")
    for q in g.locations:
        eng = g.dynamics[q]
        if isinstance(eng, AffineCone):
            if getattr(eng, "implicit", False):
                continue
            out.append(f"dynamics {q} affine_cone {{ {format_dnf(eng.D)} }}")
            continue
        body = [f"pieces {' '.join(eng.cells)}"]
        for p, cs in eng.groups.items():
            if tuple(cs) != (p,):
                body.append(f"group {p} = {' '.join(cs)}")
        declared = getattr(eng, "declared", None)
        suffix = declared.suffix if declared is not None else eng.suffix
        sup = declared.superword if declared is not None else eng.superword_label
        for c, ws in suffix.items():
            body.append(f"suffix {c} = {', '.join(sorted(str(w) for w in ws))}")
        for c, sw in sup.items():
            body.append(f"superword {c} = {sw}")
        m = eng.model
        if isinstance(m, TableModel):
            body.append("crossing table")
            for name, segs in zip(m.names, m.trajs):
                body.append(f"trajectory {name} = {format_segments(segs)}")
        elif isinstance(m, StaticModel):
            body.append(f"crossing static {m.cell}")
        elif m is not None:
            body.append(f"crossing {m.name}")
        out.append(f"dynamics {q} oracle {{\n  " + "\n  ".join(body) + "\n}")
    for q, items in g.explicit.items():
        out.append(f"partition {q} {{\n" + "\n".join(f"  {n} : {format_dnf(f)}" for n, f in items) + "\n}")
    for t in g.transitions:
        guard = _format_reset(g.dynamics[t.src], t.guard)
        out.append(f"transition {t.src} -> {t.dst} when {guard} do {t.action} reset "
                   f"{_format_reset(g.dynamics[t.dst], t.reset)}")
    if g.init is not None:
        out.append(f"init {g.init.location} " + " ".join(format_rational(v) for v in g.init.y))
    return "\n".join(out) + "\n"


def structure(g: MGame) -> tuple:
    """A comparable summary of a game (formulas up to syntax, oracle labels as sets)."""
    def dyn(q):
        e = g.dynamics[q]
        if isinstance(e, AffineCone):
            return ("affine", e.D.simplify())
        m = e.model
        return ("oracle", e.cells, tuple(sorted(e.groups.items())), tuple(sorted(e.suffix.items(), key=str)),
                tuple(sorted((c, str(s)) for c, s in e.superword_label.items())), getattr(m, "name", None),
                tuple(map(tuple, getattr(m, "trajs", ()))))

    def val(v):
        return v.simplify() if isinstance(v, Dnf) else frozenset(v)

    return (g.dim, tuple(g.locations), frozenset(g.goal), tuple(g.controllable), tuple(g.uncontrollable),
            tuple((q, dyn(q)) for q in g.locations),
            tuple(sorted((q, f.simplify()) for q, f in g.domains.items())),
            tuple((t.src, val(t.guard), t.action, val(t.reset), t.dst) for t in g.transitions),
            tuple((q, tuple((n, f.simplify()) for n, f in items)) for q, items in g.explicit.items()),
            g.init)
