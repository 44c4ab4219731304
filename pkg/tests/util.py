"""Shared helpers for the test suite."""
from importlib import resources

from omgames.dynamics.affine import AffineCone
from omgames.gamefile import parse_game

CORPUS = sorted(f.name[:-6] for f in resources.files("omgames").joinpath("corpus").iterdir()
                if f.name.endswith(".mgame"))


def corpus_text(name):
    return resources.files("omgames").joinpath("corpus", f"{name}.mgame").read_text()


def load(name):
    return parse_game(corpus_text(name))


def is_affine(g):
    return all(isinstance(g.dynamics[q], AffineCone) for q in g.locations)


def is_deterministic(g):
    return is_affine(g) and all(g.dynamics[q].deterministic for q in g.locations)


AFFINE = [n for n in CORPUS if is_affine(load(n))]


def winning_cells(ws, q):
    """Oracle cells covered by the winning pieces at ``q``."""
    out = set()
    for loc, name in ws.pieces:
        if loc == q:
            out.update(ws.lp.piece(q, name).cells)
    return out
