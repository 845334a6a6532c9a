"""Bimatrix games: payoffs, best responses, Nash equilibria and equivalences.

Actions are indexed from 0. Games loaded as ``rational`` keep every entry as
a :class:`fractions.Fraction`, and the equilibrium solver then runs in exact
arithmetic; ``float`` games use the tolerance ``DEFAULT_TOL``.
"""

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import _linalg
from .errors import GameInputError, GameParseError

DEFAULT_TOL = 1e-9


class Player(str, Enum):
    A = "A"
    B = "B"

    @property
    def other(self):
        return Player.B if self is Player.A else Player.A


RATIONAL = "rational"
FLOAT = "float"


def parse_entry(value, exact, where=None):
    """Convert a JSON entry (number or "p/q" string) to Fraction or float."""
    if isinstance(value, bool):
        raise GameParseError(f"boolean is not a payoff: {value!r}", where)
    try:
        if exact:
            if isinstance(value, float):
                if not math.isfinite(value):
                    raise ValueError("non-finite")
                return Fraction(str(value))
            return Fraction(value)
        number = float(Fraction(value)) if isinstance(value, str) else float(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise GameParseError(f"bad payoff entry {value!r} ({exc})", where) from None
    if not math.isfinite(number):
        raise GameParseError(f"non-finite payoff {value!r}", where)
    return number


def format_entry(value):
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    return value


@dataclass(frozen=True)
class PayoffBimatrix:
    """The game (A, B): ``a[i][j]`` and ``b[i][j]`` are the payoffs of the
    row player A and column player B when A plays i and B plays j."""

    a: tuple
    b: tuple
    entry_kind: str = RATIONAL
    name: str = ""

    def __post_init__(self):
        if self.entry_kind not in (RATIONAL, FLOAT):
            raise GameInputError(f"unknown entry kind {self.entry_kind!r}")
        exact = self.entry_kind == RATIONAL
        coerced = []
        for label, mat in (("A", self.a), ("B", self.b)):
            rows = tuple(
                tuple(parse_entry(v, exact, f"{label}[{i}][{j}]") for j, v in enumerate(row))
                for i, row in enumerate(mat)
            )
            if not rows or not rows[0]:
                raise GameInputError(f"matrix {label} is empty")
            if any(len(r) != len(rows[0]) for r in rows):
                raise GameInputError(f"matrix {label} is ragged")
            coerced.append(rows)
        a, b = coerced
        if (len(a), len(a[0])) != (len(b), len(b[0])):
            raise GameInputError("A and B must have the same shape")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_lists(cls, a, b, entry_kind=None, name=""):
        if entry_kind is None:
            flat = [v for row in list(a) + list(b) for v in row]
            entry_kind = FLOAT if any(isinstance(v, float) for v in flat) else RATIONAL
        return cls(tuple(map(tuple, a)), tuple(map(tuple, b)), entry_kind, name)

    @property
    def n(self):
        return len(self.a)

    @property
    def m(self):
        return len(self.a[0])

    @property
    def exact(self):
        return self.entry_kind == RATIONAL

    @property
    def tol(self):
        return 0 if self.exact else DEFAULT_TOL

    @cached_property
    def a_array(self):
        return np.array([[float(v) for v in row] for row in self.a])

    @cached_property
    def b_array(self):
        return np.array([[float(v) for v in row] for row in self.b])

    def as_float(self):
        return PayoffBimatrix(self.a_array.tolist(), self.b_array.tolist(), FLOAT, self.name)

    def matrix(self, player):
        return self.a if Player(player) is Player.A else self.b

    def action_count(self, player):
        return self.n if Player(player) is Player.A else self.m

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "A": [[format_entry(v) for v in row] for row in self.a],
            "B": [[format_entry(v) for v in row] for row in self.b],
            "entry_kind": self.entry_kind,
            "name": self.name,
        }


def game_from_dict(data):
    if not isinstance(data, dict):
        raise GameParseError("game must be a JSON object")
    for key in ("A", "B"):
        if key not in data:
            raise GameParseError("missing field", key)
        if not isinstance(data[key], list) or not all(isinstance(r, list) for r in data[key]):
            raise GameParseError("must be a list of rows", key)
    kind = data.get("entry_kind", RATIONAL)
    if kind not in (RATIONAL, FLOAT):
        raise GameParseError(f"must be 'rational' or 'float', got {kind!r}", "entry_kind")
    game = PayoffBimatrix.from_lists(data["A"], data["B"], kind, str(data.get("name", "")))
    for key, actual in (("n", game.n), ("m", game.m)):
        if key in data and data[key] != actual:
            raise GameParseError(f"declared {data[key]} but matrices give {actual}", key)
    return game


def loads_game(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return game_from_dict(data)


def load_game(path):
    with open(path, encoding="utf-8") as fh:
        return loads_game(fh.read())


def save_game(game, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(game.to_dict(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class SimplexPoint:
    weights: tuple
    player: Player

    def __post_init__(self):
        w = tuple(self.weights)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "player", Player(self.player))
        exact = _linalg.is_exact(w)
        if any(v < (0 if exact else -1e-12) for v in w):
            raise GameInputError(f"negative weight in {w}")
        total = sum(w)
        if (total != 1) if exact else abs(total - 1) > 1e-12:
            raise GameInputError(f"weights sum to {total}, not 1")

    @classmethod
    def vertex(cls, index, size, player):
        return cls(tuple(Fraction(int(k == index)) for k in range(size)), player)

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, k):
        return self.weights[k]


@dataclass(frozen=True)
class GeneralizedSimplexPoint:
    """Affine combination of vertices (entries may be negative)."""

    weights: tuple
    indifference_value: object

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, k):
        return self.weights[k]

    @property
    def in_simplex(self):
        return all(v >= 0 for v in self.weights)


@dataclass(frozen=True)
class ActionPermutationPair:
    """``sigma[i]`` is the original row shown as row i; ``tau`` likewise for columns."""

    sigma: tuple
    tau: tuple

    def __post_init__(self):
        for label, perm in (("sigma", self.sigma), ("tau", self.tau)):
            if sorted(perm) != list(range(len(perm))):
                raise GameInputError(f"{label} is not a permutation of 0..{len(perm) - 1}")
        object.__setattr__(self, "sigma", tuple(self.sigma))
        object.__setattr__(self, "tau", tuple(self.tau))

    @classmethod
    def identity(cls, n, m):
        return cls(tuple(range(n)), tuple(range(m)))


PURE = "pure"
MIXED = "mixed"
CONTINUUM = "continuum_segment"
HIGHER_DIM = "degenerate_unsupported"

SADDLE = "saddle"
SINK = "sink"
UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class EquilibriumRecord:
    x: tuple
    y: tuple
    support_a: tuple
    support_b: tuple
    kind: str
    stability: str = UNCLASSIFIED
    endpoints: tuple = field(default=None)

    def with_stability(self, stability):
        return replace(self, stability=stability)

    def to_dict(self):
        out = {
            "x": [format_entry(v) for v in self.x],
            "y": [format_entry(v) for v in self.y],
            "support_a": list(self.support_a),
            "support_b": list(self.support_b),
            "kind": self.kind,
            "stability": self.stability,
        }
        if self.endpoints is not None:
            out["endpoints"] = [
                {"x": [format_entry(v) for v in ex], "y": [format_entry(v) for v in ey]}
                for ex, ey in self.endpoints
            ]
        return out


def _vector(s, size, what):
    values = tuple(s)
    if len(values) != size:
        raise GameInputError(f"{what} has {len(values)} entries, expected {size}")
    return values


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def payoff_vector(game, player, opponent):
    """Payoff of each of ``player``'s actions against the opponent's mixed strategy."""
    player = Player(player)
    if player is Player.A:
        y = _vector(opponent, game.m, "y")
        return tuple(_dot(row, y) for row in game.a)
    x = _vector(opponent, game.n, "x")
    return tuple(_dot(col, x) for col in zip(*game.b))


def expected_payoff(game, x, y):
    x = _vector(x, game.n, "x")
    y = _vector(y, game.m, "y")
    return _dot(x, payoff_vector(game, Player.A, y)), _dot(x, [_dot(r, y) for r in game.b])


def _tol(game, tol, *vectors):
    if tol is not None:
        return tol
    if game.exact and all(_linalg.is_exact(v) for v in vectors):
        return 0
    return DEFAULT_TOL


def best_response_set(game, player, opponent, tol=None):
    values = payoff_vector(game, player, opponent)
    tol = _tol(game, tol, tuple(opponent))
    top = max(values)
    return frozenset(k for k, v in enumerate(values) if v >= top - tol)


def verify_equilibrium(game, x, y, tol=None):
    x = _vector(x, game.n, "x")
    y = _vector(y, game.m, "y")
    tol = _tol(game, tol, x, y)
    for strategy, values in ((x, payoff_vector(game, Player.A, y)), (y, payoff_vector(game, Player.B, x))):
        support = [k for k, w in enumerate(strategy) if w > tol]
        level = [values[k] for k in support]
        if max(level) - min(level) > tol:
            return False
        if any(v > min(level) + tol for v in values):
            return False
    return True


def _support(weights, tol):
    return tuple(k for k, w in enumerate(weights) if w > tol)


def _solution_set(payoff, indifferent, support, size, tol):
    """Strategies z with supp(z) in ``support`` making ``indifferent`` actions of
    the opponent tied and optimal.

    ``payoff[i][s]`` is the opponent's payoff for action i against pure s.
    Returns None, ("point", z), ("segment", z_lo, z_hi, z_mid) or ("higher", z)
    with z strictly positive on ``support``.
    """
    k = len(support)
    zero = Fraction(0) if tol == 0 else 0.0
    one = Fraction(1) if tol == 0 else 1.0
    rows = [[payoff[i][s] for s in support] + [-one] for i in indifferent]
    rows.append([one] * k + [zero])
    rhs = [zero] * len(indifferent) + [one]
    sol = _linalg.affine_solution(rows, rhs, tol)
    if sol is None:
        return None
    base, basis = sol

    def expand(vec):
        z = [zero] * size
        for s, w in zip(support, vec[:k]):
            z[s] = w
        return tuple(z)

    # constraints written as g0 + t * g1 <= 0
    def constraints(vec, direction):
        out = [(-vec[c], -direction[c]) for c in range(k)]
        others = [i for i in range(len(payoff)) if i not in indifferent]
        for i in others:
            g0 = sum(payoff[i][s] * vec[c] for c, s in enumerate(support)) - vec[k]
            g1 = sum(payoff[i][s] * direction[c] for c, s in enumerate(support)) - direction[k]
            out.append((g0, g1))
        return out

    def strictly_supported(vec):
        return all(vec[c] > tol for c in range(k))

    if not basis:
        ok = strictly_supported(base) and all(g0 <= tol for g0, _ in constraints(base, [zero] * (k + 1)))
        return ("point", expand(base)) if ok else None
    if len(basis) > 1:
        inner = _interior_point(base, basis, constraints, tol)
        if inner is None or not strictly_supported(inner):
            return None
        return ("higher", expand(inner))
    direction = basis[0]
    lo, hi = -math.inf, math.inf
    for g0, g1 in constraints(base, direction):
        if abs(g1) <= tol:
            if g0 > tol:
                return None
            continue
        bound = -g0 / g1
        if g1 > 0:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
    if lo > hi + tol:
        return None
    p_lo = [b + lo * d for b, d in zip(base, direction)]
    p_hi = [b + hi * d for b, d in zip(base, direction)]
    if hi - lo <= tol:
        return ("point", expand(p_lo)) if strictly_supported(p_lo) else None
    mid = [(a + b) / 2 for a, b in zip(p_lo, p_hi)]
    if not strictly_supported(mid):
        return None
    ends = sorted([expand(p_lo), expand(p_hi)])
    return ("segment", ends[0], ends[1], expand(mid))


def _interior_point(base, basis, constraints, tol):
    """Average of the vertices of {t : g0 + g1 . t <= 0}, mapped back to
    base + sum t_i basis_i. Exact for rational input."""
    d = len(basis)
    zero = base[0] - base[0]
    # constraints() is affine in the direction, so evaluate it per basis vector
    origin = constraints(base, [zero] * len(base))
    slopes = [constraints(base, b) for b in basis]
    halfspaces = [(origin[i][0], [slopes[k][i][1] for k in range(d)]) for i in range(len(origin))]
    vertices = []
    for active in itertools.combinations(range(len(halfspaces)), d):
        mat = [halfspaces[i][1] for i in active]
        rhs = [-halfspaces[i][0] for i in active]
        t = _linalg.solve(mat, rhs, tol)
        if t is None:
            continue
        if all(g0 + sum(a * b for a, b in zip(g1, t)) <= tol for g0, g1 in halfspaces):
            vertices.append(t)
    if not vertices:
        return None
    centre = [sum(v[k] for v in vertices) / len(vertices) for k in range(d)]
    return [b + sum(centre[k] * basis[k][c] for k in range(d)) for c, b in enumerate(base)]


def support_pairs(n, m):
    """All (support_a, support_b) pairs by increasing total size, then lexicographically."""
    subsets_a = [c for r in range(1, n + 1) for c in itertools.combinations(range(n), r)]
    subsets_b = [c for r in range(1, m + 1) for c in itertools.combinations(range(m), r)]
    pairs = [(sa, sb) for sa in subsets_a for sb in subsets_b]
    return sorted(pairs, key=lambda p: (len(p[0]) + len(p[1]), p))


def _representative(solution):
    return solution[3] if solution[0] == "segment" else solution[1]


def enumerate_equilibria(game, tol=None):
    """All Nash equilibria by support enumeration.

    Isolated equilibria come back as ``pure`` or ``mixed`` records. A support
    pair whose equalization system has a one-dimensional solution set yields a
    ``continuum_segment`` record with its two endpoint profiles.
    """
    tol = game.tol if tol is None else tol
    bt = [list(col) for col in zip(*game.b)]
    records = []
    for sa, sb in support_pairs(game.n, game.m):
        ys = _solution_set(game.a, sa, sb, game.m, tol)
        if ys is None:
            continue
        xs = _solution_set(bt, sb, sa, game.n, tol)
        if xs is None:
            continue
        if ys[0] == "point" and xs[0] == "point":
            kind = PURE if len(sa) == len(sb) == 1 else MIXED
            stability = PURE if kind == PURE else UNCLASSIFIED
            records.append(EquilibriumRecord(xs[1], ys[1], sa, sb, kind, stability))
        elif {xs[0], ys[0]} == {"point", "segment"}:
            if xs[0] == "segment":
                ends = ((xs[1], ys[1]), (xs[2], ys[1]))
            else:
                ends = ((xs[1], ys[1]), (xs[1], ys[2]))
            mid_x = tuple((u + v) / 2 for u, v in zip(ends[0][0], ends[1][0]))
            mid_y = tuple((u + v) / 2 for u, v in zip(ends[0][1], ends[1][1]))
            records.append(EquilibriumRecord(mid_x, mid_y, sa, sb, CONTINUUM, endpoints=ends))
        else:
            records.append(EquilibriumRecord(_representative(xs), _representative(ys), sa, sb, HIGHER_DIM))
    return records


def check_nondegenerate(game, tol=None):
    """Whether every pure strategy has a unique best reply.

    Returns ``(ok, violations)``; each violation is ``(player, action, replies)``
    where ``replies`` is the opponent's best-response set to that pure action.
    """
    tol = game.tol if tol is None else tol
    violations = []
    for player, count in ((Player.A, game.n), (Player.B, game.m)):
        for action in range(count):
            pure = SimplexPoint.vertex(action, count, player).weights
            replies = best_response_set(game, player.other, pure, tol)
            if len(replies) > 1:
                violations.append((player, action, tuple(sorted(replies))))
    return not violations, violations


def _index_pairs(n, m):
    for i, i2 in itertools.combinations(range(n), 2):
        for j, j2 in itertools.combinations(range(m), 2):
            yield i, i2, j, j2


def quasi_supermodular_conditions(game):
    """(A passes, B passes) for the strict-implication monotonicity test."""
    a, b = game.a, game.b
    a_ok = all(
        not (a[i2][j] > a[i][j]) or a[i2][j2] > a[i][j2] for i, i2, j, j2 in _index_pairs(game.n, game.m)
    )
    b_ok = all(
        not (b[i][j2] > b[i][j]) or b[i2][j2] > b[i2][j] for i, i2, j, j2 in _index_pairs(game.n, game.m)
    )
    return a_ok, b_ok


def supermodular_conditions(game):
    """(A passes, B passes) for strictly increasing differences."""
    a, b = game.a, game.b
    a_ok = all(a[i2][j2] - a[i][j2] > a[i2][j] - a[i][j] for i, i2, j, j2 in _index_pairs(game.n, game.m))
    b_ok = all(b[i2][j2] - b[i2][j] > b[i][j2] - b[i][j] for i, i2, j, j2 in _index_pairs(game.n, game.m))
    return a_ok, b_ok


def is_quasi_supermodular(game):
    return all(quasi_supermodular_conditions(game))


def is_supermodular(game):
    return all(supermodular_conditions(game))


def apply_equivalence(game, scale_a=1, offsets_a=None, scale_b=1, offsets_b=None, perm=None):
    """Linear rescaling (per-column offsets for A, per-row offsets for B),
    then relabelling so that new entry (i, j) is old entry (sigma[i], tau[j])."""
    if not scale_a > 0 or not scale_b > 0:
        raise GameInputError("scales must be positive")
    n, m = game.n, game.m
    offsets_a = [0] * m if offsets_a is None else list(offsets_a)
    offsets_b = [0] * n if offsets_b is None else list(offsets_b)
    if len(offsets_a) != m or len(offsets_b) != n:
        raise GameInputError("offsets_a needs one entry per column, offsets_b one per row")
    perm = ActionPermutationPair.identity(n, m) if perm is None else perm
    if len(perm.sigma) != n or len(perm.tau) != m:
        raise GameInputError("permutation sizes do not match the game")
    conv = (lambda v: Fraction(v) if not isinstance(v, float) else Fraction(str(v))) if game.exact else float
    sa, sb = conv(scale_a), conv(scale_b)
    a = [[sa * game.a[i][j] + conv(offsets_a[j]) for j in range(m)] for i in range(n)]
    b = [[sb * game.b[i][j] + conv(offsets_b[i]) for j in range(m)] for i in range(n)]
    a = [[a[perm.sigma[i]][perm.tau[j]] for j in range(m)] for i in range(n)]
    b = [[b[perm.sigma[i]][perm.tau[j]] for j in range(m)] for i in range(n)]
    return PayoffBimatrix.from_lists(a, b, game.entry_kind, game.name)


def permute_profile(x, y, perm):
    """Image of a profile of the original game in the relabelled game."""
    inv_s = {old: new for new, old in enumerate(perm.sigma)}
    inv_t = {old: new for new, old in enumerate(perm.tau)}
    nx = [None] * len(x)
    ny = [None] * len(y)
    for old, w in enumerate(x):
        nx[inv_s[old]] = w
    for old, w in enumerate(y):
        ny[inv_t[old]] = w
    return tuple(nx), tuple(ny)
