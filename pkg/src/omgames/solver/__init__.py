"""Winning-set computation: abstract (piece/word) and direct (QE) backends."""
from __future__ import annotations

from .abstract import AbstractGame, AbstractSolver
from .direct import DirectSolver, timepred_formula
from .result import BackendMismatch, NoConvergence, SolverError, WinningSet


def winning_fixpoint(game, mode: str = "partial", backend: str = "abstract", literal_upred: bool = False,
                     paper_timepred_perfect: bool = False, cap: int = 64, lp=None) -> WinningSet:
    if backend == "abstract":
        return AbstractSolver(game, mode, literal_upred, paper_timepred_perfect, lp).solve()
    if backend == "direct":
        if paper_timepred_perfect:
            raise BackendMismatch("the existential perfect-mode reading is an abstract-backend flag")
        return DirectSolver(game, mode, literal_upred, cap).solve()
    raise ValueError(f"unknown backend {backend}")


def is_winning(ws: WinningSet, state) -> bool:
    return ws.contains(state[0], state[1])


__all__ = ["AbstractGame", "AbstractSolver", "DirectSolver", "WinningSet", "SolverError", "NoConvergence",
           "BackendMismatch", "winning_fixpoint", "is_winning", "timepred_formula"]
