"""Clock regions of timed automata, as explicit partitions of the non-negative orthant."""
from __future__ import annotations

from itertools import combinations, product

from .dynamics.affine import yvars
from .logic.constraints import make
from .logic.dnf import Dnf
from .logic.syntax import format_dnf


def _clock_classes(cmax: int) -> list:
    """``("eq", k)``, ``("open", k)`` for ``k < x < k+1``, or ``("top", cmax)`` for ``x > cmax``."""
    out = []
    for k in range(cmax + 1):
        out.append(("eq", k))
        out.append(("open", k) if k < cmax else ("top", k))
    return out


def _class_atoms(x: str, cls) -> list:
    kind, k = cls
    if kind == "eq":
        return [make({x: 1}, "=", k)]
    if kind == "open":
        return [make({x: -1}, "<", -k), make({x: 1}, "<", k + 1)]
    return [make({x: -1}, "<", -k)]


def clock_regions(n: int, cmax: int) -> list:
    """``(name, Dnf)`` for every region of ``n`` clocks with maximal constant ``cmax``."""
    ys = yvars(n)
    out = []
    for classes in product(_clock_classes(cmax), repeat=n):
        base = [a for x, c in zip(ys, classes) for a in _class_atoms(x, c)]
        frac = [i for i, c in enumerate(classes) if c[0] == "open"]
        # orderings of the fractional parts, with ties, of the clocks in open classes
        for order in _weak_orders(frac):
            atoms = list(base)
            for i, j in combinations(frac, 2):
                ki, kj = classes[i][1], classes[j][1]
                rel = order[i] - order[j]
                op = "=" if rel == 0 else "<"
                # frac(y_i) vs frac(y_j) is y_i - y_j vs k_i - k_j
                if rel <= 0:
                    atoms.append(make({ys[i]: 1, ys[j]: -1}, op, ki - kj))
                else:
                    atoms.append(make({ys[j]: 1, ys[i]: -1}, "<", kj - ki))
            out.append((f"r{len(out)}", Dnf.conj(atoms)))
    return out


def _weak_orders(items: list) -> list:
    """All maps item -> rank describing weak orders (ties allowed)."""
    if not items:
        return [{}]
    res = []
    for ranks in product(range(len(items)), repeat=len(items)):
        used = sorted(set(ranks))
        if used != list(range(len(used))):
            continue
        res.append(dict(zip(items, ranks)))
    return res


def region_game_text(cmax: int = 2) -> str:
    """A two-clock timed game whose explicit partition is the region partition."""
    regions = clock_regions(2, cmax)
    lines = [f"# Two clocks, maximal constant {cmax}; the explicit partition lists the clock regions.",
             "dim 2", "location q1", "location q2 goal", "location q3",
             "action c controllable", "action u uncontrollable",
             "domain q1 y1 >= 0 & y2 >= 0",
             "dynamics q1 affine_cone { d1 = 1 & d2 = 1 }",
             "partition q1 {"]
    lines += [f"  {name} : {format_dnf(f)}" for name, f in regions]
    lines += ["}",
              "transition q1 -> q2 when 1 <= y1 & y1 <= 2 & y2 < 1 do c reset y1 = 0 & y2 = 0",
              "transition q1 -> q3 when y2 = 2 & y1 = 2 do u reset y1 = 0 & y2 = 0",
              "transition q1 -> q1 when y1 > 2 do c reset y2 = 0 & y1 > 0 & y1 < 1",
              "init q1 0 0"]
    return "\n".join(lines) + "\n"
