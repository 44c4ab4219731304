"""Independent reference oracles used by the acceptance and property tests."""
import random
from fractions import Fraction

from omgames.logic.constraints import make
from omgames.logic.formula import And, Atom, Exists, Forall, Not, Or
from omgames.solver.finite import FiniteGame

OPS = ("<", "<=", "=")
FREE = ("x", "y")


# ------------------------------------------------------------ formulas
# A random formula is a nested tuple: ("atom", cx, cy, cz, op, b), ("not", f),
# ("and", f, g) or ("or", f, g).  The quantified variable is always z.

def random_body(rng, depth=2):
    if depth == 0 or rng.random() < 0.3:
        cz = rng.choice([-2, -1, 1, 2, 3]) if rng.random() < 0.85 else 0
        return ("atom", rng.randint(-3, 3), rng.randint(-3, 3), cz, rng.choice(OPS), rng.randint(-4, 4))
    kind = rng.choice(["and", "or", "not", "and"])
    if kind == "not":
        return ("not", random_body(rng, depth - 1))
    return (kind, random_body(rng, depth - 1), random_body(rng, depth - 1))


def _compare(lhs, op, rhs):
    return lhs < rhs if op == "<" else lhs <= rhs if op == "<=" else lhs == rhs


def evaluate(body, x, y, z):
    tag = body[0]
    if tag == "atom":
        _, cx, cy, cz, op, b = body
        return _compare(cx * x + cy * y + cz * z, op, b)
    if tag == "not":
        return not evaluate(body[1], x, y, z)
    left, right = evaluate(body[1], x, y, z), evaluate(body[2], x, y, z)
    return left and right if tag == "and" else left or right


def to_formula(body):
    tag = body[0]
    if tag == "atom":
        _, cx, cy, cz, op, b = body
        return Atom(make({"x": cx, "y": cy, "z": cz}, op, b))
    if tag == "not":
        return Not(to_formula(body[1]))
    parts = (to_formula(body[1]), to_formula(body[2]))
    return And(parts) if tag == "and" else Or(parts)


def quantified(body, quantifier):
    return (Exists if quantifier == "exists" else Forall)("z", to_formula(body))


def _atoms(body):
    if body[0] == "atom":
        return [body]
    return [a for sub in body[1:] for a in _atoms(sub)]


def critical_z(body, x, y):
    """Values of z at which some atom changes truth, plus one point in every gap."""
    roots = sorted({Fraction(b - cx * x - cy * y, cz) for _, cx, cy, cz, _, b in _atoms(body) if cz})
    if not roots:
        return [Fraction(0)]
    pts = [roots[0] - 1, roots[-1] + 1] + roots
    pts += [(a + b) / 2 for a, b in zip(roots, roots[1:])]
    return pts


def oracle_truth(body, quantifier, x, y):
    """Exact truth of ``Q z. body`` at ``(x, y)``: the body is constant between critical values."""
    vals = (evaluate(body, x, y, z) for z in critical_z(body, x, y))
    return any(vals) if quantifier == "exists" else all(vals)


def dense_points(rng, n=12, radius=4, step=Fraction(1, 4)):
    k = int(radius / step)
    return [(rng.randint(-k, k) * step, rng.randint(-k, k) * step) for _ in range(n)]


# ------------------------------------------------------------ finite games

def unfold_winning(fg: FiniteGame) -> set:
    """Winning states by game-tree unfolding to depth ``len(states)``.

    ``win(s, k)``: ``s`` is a goal, or with ``k`` moves left every
    uncontrollable successor wins with ``k - 1`` and some controllable
    action has only winning successors.
    """
    memo = {}

    def win(s, k):
        if s in fg.goal:
            return True
        if k == 0:
            return False
        key = (s, k)
        if key not in memo:
            env_ok = all(win(t, k - 1) for t in fg.u_succ(s))
            memo[key] = env_ok and any(
                fg.succ(s, c) and all(win(t, k - 1) for t in fg.succ(s, c))
                for c in fg.controllable)
        return memo[key]

    n = len(fg.states)
    return {s for s in fg.states if win(s, n)}


def quotient(fg: FiniteGame, blocks):
    """The quotient game over ``blocks`` and the map state -> block name."""
    index = {s: f"b{i}" for i, b in enumerate(blocks) for s in b}
    names = [f"b{i}" for i in range(len(blocks))]
    goal = {index[s] for s in fg.goal}
    edges = sorted({(index[s], a, index[t]) for s, a, t in fg.edges})
    return FiniteGame(names, goal, set(fg.controllable), set(fg.uncontrollable), edges), index


def seeded_games(count, n, seed):
    from omgames.solver.finite import random_game

    rng = random.Random(seed)
    return [random_game(n, rng) for _ in range(count)]
