"""Command-line entry point: ``omgames check|words|solve|synthesize|simulate|finite-solve``.

Exit codes: 0 success, 1 property violation, 2 usage, parse or unsupported-query errors.
"""
from __future__ import annotations

import argparse
import io
import sys
from contextlib import redirect_stdout
from importlib import resources
from pathlib import Path

from .dynamics.affine import EngineError
from .game import GameState, ExtendedState
from .gamefile import GameFileError, load_game
from .logic.syntax import format_dnf, format_rational
from .solver import winning_fixpoint
from .solver.finite import brute_force_winning, finite_attractor, parse_finite, trap_oracle
from .solver.result import SolverError
from .strategy import StrategyError, explain_move, format_strategy, synthesize
from .simulator import validate_strategy
from .words import suffix_partition, superword_partition


class UsageError(Exception):
    pass


def corpus_path(name: str) -> Path:
    return Path(str(resources.files("omgames") / "corpus" / name))


def read_source(path: str) -> str:
    p = Path(path)
    if not p.exists():
        alt = corpus_path(p.name if p.suffix else p.name + ".mgame")
        if alt.exists():
            p = alt
        else:
            raise UsageError(f"no such file: {path}")
    return p.read_text()


def _load(path: str):
    g, diags = load_game(read_source(path))
    for d in diags:
        print(d)
    if g is None:
        raise GameFileError(diags)
    return g


def _block(fields: dict):
    print("---result---")
    for k, v in fields.items():
        print(f"{k}: {v}")
    print("---end---")


def _point(y) -> str:
    return "(" + ", ".join(format_rational(v) for v in y) + ")"


# ----------------------------------------------------------------- commands

def cmd_check(a) -> int:
    g = _load(a.file)
    part = g.partition()
    print(f"{len(g.locations)} locations, {len(g.transitions)} transitions, dim {g.dim}")
    for q in g.locations:
        kind = "oracle" if g.is_oracle(q) else "affine_cone"
        goal = " (goal)" if q in g.goal else ""
        print(f"  {q}{goal}: {kind}, {len(part.pieces[q])} pieces")
    _block({"status": "ok", "locations": len(g.locations), "transitions": len(g.transitions),
            "pieces": part.size()})
    return 0


def cmd_words(a) -> int:
    g = _load(a.file)
    if a.location not in g.locations:
        raise UsageError(f"unknown location {a.location}")
    lp = superword_partition(g) if a.superword else suffix_partition(g)
    items = lp.pieces[a.location]
    for p in items:
        lab = str(p.superword) if a.superword else "{" + ",".join(sorted(str(w) for w in p.suffix)) + "}"
        where = format_dnf(p.formula) if p.formula is not None else "cells " + " ".join(p.cells)
        print(f"{p.name} [{p.base}] {lab} : {where}")
    _block({"kind": lp.kind, "location": a.location, "pieces": len(items)})
    return 0


def _solve(g, a):
    return winning_fixpoint(g, a.mode, a.backend, literal_upred=a.literal_upred,
                            paper_timepred_perfect=a.paper_timepred_perfect, cap=a.cap)


def cmd_solve(a) -> int:
    g = _load(a.file)
    ws = _solve(g, a)
    if ws.backend == "abstract":
        for (q, name), k in sorted(ws.rank.items(), key=lambda kv: (kv[1], kv[0])):
            p = ws.lp.piece(q, name)
            where = format_dnf(p.formula) if p.formula is not None else "cells " + " ".join(p.cells)
            print(f"rank {k}: {q}:{name} : {where}")
        winning = len(ws.pieces)
    else:
        for k, layer in enumerate(ws.layers):
            for q in layer.locations():
                print(f"layer {k}: {q} : {format_dnf(layer.at(q))}")
        winning = sum(1 for q in g.locations if ws.as_defset().at(q).is_sat())
    fields = {"mode": a.mode, "backend": a.backend, "iterations": ws.iterations, "max_rank": ws.max_rank(),
              "winning": winning}
    if g.init is not None:
        fields["init_winning"] = str(ws.contains(g.init.location, g.init.y)).lower()
    _block(fields)
    return 0


def cmd_synthesize(a) -> int:
    g = _load(a.file)
    a.backend = "abstract"
    ws = _solve(g, a)
    st = synthesize(g, a.mode, ws)
    print(format_strategy(st))
    fields = {"mode": a.mode, "entries": len(st.entries)}
    if g.init is not None:
        if a.mode == "perfect":
            ws_ = g.witness_candidates(g.init.location, g.init.y)
            w = ws_[0] if ws_ else None
        else:
            w = None
        mv = explain_move(st, g, ExtendedState(g.init.location, g.init.y, w))
        if mv is None:
            fields["init_move"] = "none"
        else:
            fields["init_move"] = f"({format_rational(mv['tau'])}, {mv['action']})"
            fields["init_rule"] = mv["rule"]
    _block(fields)
    return 0


def cmd_simulate(a) -> int:
    g = _load(a.file)
    a.backend = "abstract"
    ws = _solve(g, a)
    st = synthesize(g, a.mode, ws)
    rep = validate_strategy(g, st, ws, samples=a.samples, seed=a.seed, adversaries=(a.adversary,),
                            losing_samples=a.losing_samples)
    print(f"{'runs':>10} {'wins':>6} {'losses':>6} {'max moves':>9} {'violations':>10}")
    print(f"{rep.runs:>10} {rep.wins:>6} {rep.losses:>6} {rep.max_moves:>9} {len(rep.violations):>10}")
    print(f"from losing states: {rep.losing_runs} runs, environment won {rep.env_wins}")
    for f in rep.failures[:10]:
        print(f"failure: {f[0]}:{_point(f[1])} {f[2]} {f[3]}")
    _block({"mode": a.mode, "adversary": a.adversary, "seed": a.seed, "runs": rep.runs, "wins": rep.wins,
            "losses": rep.losses, "violations": len(rep.violations), "losing_runs": rep.losing_runs,
            "env_wins": rep.env_wins, "max_moves": rep.max_moves})
    return 0 if rep.ok else 1


def cmd_finite(a) -> int:
    try:
        fg = parse_finite(read_source(a.file))
    except ValueError as e:
        raise UsageError(f"finite game: {e}")
    W, rank = finite_attractor(fg)
    for s in fg.states:
        print(f"{s}: " + (f"winning, rank {rank[s]}" if s in W else "losing"))
    agree = W == trap_oracle(fg)
    if len(fg.states) <= 8:
        agree = agree and W == brute_force_winning(fg)
    _block({"states": len(fg.states), "winning": len(W), "oracle_agreement": str(agree).lower()})
    return 0 if agree else 1


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="omgames", description="Reachability games with strong resets.")
    sub = p.add_subparsers(dest="command", required=True)

    def solving(sp, backend=True):
        sp.add_argument("file")
        sp.add_argument("--mode", choices=["perfect", "partial"], default="partial")
        if backend:
            sp.add_argument("--backend", choices=["abstract", "direct"], default="abstract")
        sp.add_argument("--literal-upred", action="store_true")
        sp.add_argument("--paper-timepred-perfect", action="store_true")
        sp.add_argument("--cap", type=int, default=64)

    c = sub.add_parser("check")
    c.add_argument("file")
    c.set_defaults(fn=cmd_check)
    w = sub.add_parser("words")
    w.add_argument("file")
    w.add_argument("--location", required=True)
    grp = w.add_mutually_exclusive_group()
    grp.add_argument("--suffix", action="store_true")
    grp.add_argument("--superword", action="store_true")
    w.set_defaults(fn=cmd_words)
    s = sub.add_parser("solve")
    solving(s)
    s.set_defaults(fn=cmd_solve)
    y = sub.add_parser("synthesize")
    solving(y, backend=False)
    y.set_defaults(fn=cmd_synthesize)
    m = sub.add_parser("simulate")
    solving(m, backend=False)
    m.add_argument("--samples", type=int, default=100)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--adversary", choices=["random", "greedy"], default="greedy")
    m.add_argument("--losing-samples", type=int, default=None)
    m.set_defaults(fn=cmd_simulate)
    f = sub.add_parser("finite-solve")
    f.add_argument("file")
    f.set_defaults(fn=cmd_finite)
    return p


def run_command(argv) -> tuple:
    """``(exit code, report text)``."""
    out = io.StringIO()
    with redirect_stdout(out):
        try:
            a = _parser().parse_args(list(argv))
        except SystemExit as e:
            return (0 if e.code == 0 else 2), out.getvalue()
        try:
            code = a.fn(a)
        except (UsageError, GameFileError, EngineError, SolverError, StrategyError) as e:
            if not isinstance(e, GameFileError):
                print(f"error: {e}")
            code = 2
    return code, out.getvalue()


def main(argv=None) -> int:
    code, text = run_command(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
