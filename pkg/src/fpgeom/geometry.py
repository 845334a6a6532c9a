"""Planar geometry of best responses inside a strategy simplex.

Points of a simplex are kept in barycentric coordinates (length-n tuples
summing to 1). For ``player`` A the objects live in B's simplex (they describe
A's best replies to y), and vice versa. Rational games give exact results.
"""

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from . import _linalg
from .errors import UnsupportedConfiguration
from .game_core import GeneralizedSimplexPoint, Player

UNIQUE = "unique"
PARALLEL_LINES = "parallel_lines"
SINGULAR_OTHER = "singular_other"

SINGULAR_RTOL = 1e-9
DEDUP_TOL = 1e-10


class IIPClass(str, Enum):
    WITH_IIP = "WithIIP"
    WITHOUT_IIP = "WithoutIIP"
    REDUCIBLE = "Reducible"


@dataclass(frozen=True)
class IndifferentPointResult:
    point: GeneralizedSimplexPoint
    status: str
    is_internal: bool
    determinant: object


@dataclass(frozen=True)
class IndifferentLineSeg:
    player: Player
    pair: tuple
    coefficients: tuple
    endpoints: tuple

    @property
    def empty(self):
        return self.endpoints is None


@dataclass(frozen=True)
class BestResponsePolygon:
    player: Player
    action: int
    vertices: tuple
    area: object

    def contains(self, point, tol=0):
        """Closed-polygon membership for a barycentric point."""
        if len(self.vertices) < 3:
            return False
        u = _plane(point)
        verts = [_plane(v) for v in self.vertices]
        for p, q in zip(verts, verts[1:] + verts[:1]):
            if _cross(p, q, u) < -tol:
                return False
        return True


def own_payoff_rows(game, player):
    """Rows indexed by ``player``'s actions, columns by the opponent's actions."""
    player = Player(player)
    if player is Player.A:
        return [list(r) for r in game.a]
    return [list(c) for c in zip(*game.b)]


def _numeric(game):
    return game.exact


def _zero(game):
    return Fraction(0) if game.exact else 0.0


def indifferent_point(game, player):
    """Affine point of the opponent's simplex where every action of ``player``
    earns the same payoff.

    Solves the n x n system whose unknowns are the first n-1 weights and the
    common payoff level; the last weight is one minus the others.
    """
    player = Player(player)
    if game.n != game.m:
        raise UnsupportedConfiguration("indifferent points need a square game", {"n": game.n, "m": game.m})
    rows = own_payoff_rows(game, player)
    n = game.n
    tilde = [[row[j] - row[n - 1] for j in range(n - 1)] + [-1] for row in rows]
    rhs = [-row[n - 1] for row in rows]
    if game.exact:
        tilde = [[Fraction(v) for v in r] for r in tilde]
        rhs = [Fraction(v) for v in rhs]
    det = _linalg.det(tilde)
    if game.exact:
        singular = det == 0
    else:
        norm = math.sqrt(sum(float(v) ** 2 for r in tilde for v in r))
        singular = abs(det) < SINGULAR_RTOL * norm**n
    if singular:
        status = PARALLEL_LINES if n == 3 and _lines_parallel(game, player) else SINGULAR_OTHER
        return IndifferentPointResult(None, status, False, det)
    sol = _linalg.solve(tilde, rhs, game.tol)
    weights = list(sol[: n - 1])
    weights.append(1 - sum(weights))
    point = GeneralizedSimplexPoint(tuple(weights), sol[n - 1])
    tol = 0 if game.exact else 1e-12
    internal = all(w >= -tol for w in weights)
    return IndifferentPointResult(point, UNIQUE, internal, det)


def line_coefficients(game, player, j, k):
    """Coefficients c with c . y = 0 describing the tie between actions j and k."""
    rows = own_payoff_rows(game, player)
    return tuple(u - v for u, v in zip(rows[j], rows[k]))


def _planar_normal(c):
    # c . y with y3 = 1 - y1 - y2 has gradient (c1 - c3, c2 - c3)
    return (c[0] - c[2], c[1] - c[2])


def _lines_parallel(game, player):
    normals = []
    for j, k in itertools.combinations(range(3), 2):
        nrm = _planar_normal(line_coefficients(game, player, j, k))
        if all(v == 0 for v in nrm) if game.exact else max(abs(v) for v in nrm) < 1e-12:
            return False
        normals.append(nrm)
    tol = 0 if game.exact else 1e-9
    for u, v in itertools.combinations(normals, 2):
        scale = 1 if game.exact else max(abs(u[0]) + abs(u[1]), 1.0) * max(abs(v[0]) + abs(v[1]), 1.0)
        if abs(u[0] * v[1] - u[1] * v[0]) > tol * scale:
            return False
    return True


def _same(p, q, tol):
    return all(abs(a - b) <= tol for a, b in zip(p, q))


def _dedup(points, tol):
    out = []
    for p in points:
        if not any(_same(p, q, tol) for q in out):
            out.append(p)
    return out


def _line_in_simplex(c, exact):
    """Intersection of {c . y = 0} with the simplex as a list of barycentric points."""
    n = len(c)
    tol = 0 if exact else 1e-15 * max(1.0, max(abs(v) for v in c))
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    points = []
    for u, v in itertools.combinations(range(n), 2):
        cu, cv = c[u], c[v]
        if abs(cu) <= tol and abs(cv) <= tol:
            points.extend([_vertex(u, n, one, zero), _vertex(v, n, one, zero)])
            continue
        if abs(cu - cv) <= tol:
            continue
        t = cu / (cu - cv)
        if -tol <= t <= 1 + tol:
            t = min(max(t, zero), one)
            p = [zero] * n
            p[u] = 1 - t
            p[v] = t
            points.append(tuple(p))
    return _dedup(points, 0 if exact else DEDUP_TOL)


def _vertex(i, n, one, zero):
    return tuple(one if k == i else zero for k in range(n))


def indifferent_lines(game, player):
    """Clipped tie segments l_jk for every pair of ``player``'s actions.

    Only pairs with a segment of positive length are returned.
    """
    player = Player(player)
    if game.n != 3 or game.m != 3:
        raise UnsupportedConfiguration("clipped indifferent segments are planar (3x3 only)")
    rows = own_payoff_rows(game, player)
    exact = game.exact
    tol = 0 if exact else DEDUP_TOL
    out = []
    for j, k in itertools.combinations(range(3), 2):
        c = line_coefficients(game, player, j, k)
        pts = _line_in_simplex(c, exact)
        if len(pts) < 2:
            continue
        p0, p1 = pts[0], pts[-1]
        lo, hi = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
        for i in range(3):
            if i in (j, k):
                continue
            h = [a - b for a, b in zip(rows[j], rows[i])]
            g0 = sum(a * b for a, b in zip(h, p0))
            g1 = sum(a * b for a, b in zip(h, p1))
            slope = g1 - g0
            if slope == 0 or (not exact and abs(slope) <= 1e-15):
                if g0 < -tol:
                    lo, hi = 1, 0
                continue
            root = -g0 / slope
            if slope > 0:
                lo = max(lo, root)
            else:
                hi = min(hi, root)
        if hi - lo <= tol:
            continue
        a = tuple(x + lo * (y - x) for x, y in zip(p0, p1))
        b = tuple(x + hi * (y - x) for x, y in zip(p0, p1))
        out.append(IndifferentLineSeg(player, (j, k), c, (a, b)))
    return out


def _plane(p):
    # affine chart of the 2-simplex; e1, e2, e3 -> (1,0), (0,1), (0,0) is counterclockwise
    return (p[0], p[1])


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def polygon_area(vertices):
    """Area as a fraction of the simplex (the chart triangle has area 1/2)."""
    if len(vertices) < 3:
        return 0
    pts = [_plane(v) for v in vertices]
    twice = sum(p[0] * q[1] - q[0] * p[1] for p, q in zip(pts, pts[1:] + pts[:1]))
    return abs(twice)


def _clip(polygon, h, exact):
    """Keep the part of ``polygon`` where h . y >= 0 (Sutherland-Hodgman)."""
    if not polygon:
        return polygon
    out = []
    vals = [sum(a * b for a, b in zip(h, p)) for p in polygon]
    for idx, p in enumerate(polygon):
        q = polygon[(idx + 1) % len(polygon)]
        vp, vq = vals[idx], vals[(idx + 1) % len(polygon)]
        if vp >= 0:
            out.append(p)
        if (vp >= 0) != (vq >= 0):
            t = vp / (vp - vq)
            out.append(tuple(a + t * (b - a) for a, b in zip(p, q)))
    return out


def best_response_polygons(game, player):
    """Closed region of the opponent simplex where each action of ``player`` is optimal."""
    player = Player(player)
    if game.n != 3 or game.m != 3:
        raise UnsupportedConfiguration("best-response polygons are planar (3x3 only)")
    exact = game.exact
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    triangle = [_vertex(i, 3, one, zero) for i in range(3)]
    rows = own_payoff_rows(game, player)
    polys = []
    for i in range(3):
        poly = triangle
        for k in range(3):
            if k != i:
                poly = _clip(poly, [a - b for a, b in zip(rows[i], rows[k])], exact)
        poly = _dedup(poly, 0 if exact else DEDUP_TOL)
        if len(poly) >= 3:
            cyc = poly + poly[:1]
            if sum(_cross(_plane(cyc[0]), _plane(p), _plane(q)) for p, q in zip(cyc[1:], cyc[2:])) < 0:
                poly = poly[::-1]
        polys.append(BestResponsePolygon(player, i, tuple(poly), polygon_area(poly)))
    return polys


def region_has_positive_measure(game, player, action):
    """Whether ``action`` is the unique best reply on an open set (any n)."""
    if game.n == 3 and game.m == 3:
        return best_response_polygons(game, player)[action].area > (0 if game.exact else 1e-12)
    from scipy.optimize import linprog

    rows = np.array(own_payoff_rows(game, player), dtype=float)
    size = rows.shape[1]
    others = [k for k in range(rows.shape[0]) if k != action]
    # maximise margin s.t. (row_action - row_k) . y >= margin, y in simplex
    a_ub = np.array([np.append(rows[k] - rows[action], 1.0) for k in others])
    res = linprog(
        c=np.append(np.zeros(size), -1.0),
        A_ub=a_ub,
        b_ub=np.zeros(len(others)),
        A_eq=np.append(np.ones(size), 0.0)[None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * size + [(None, 1.0)],
        method="highs",
    )
    return bool(res.status == 0 and -res.fun > 1e-12)


def is_reducible(game):
    return not all(
        region_has_positive_measure(game, player, action)
        for player in (Player.A, Player.B)
        for action in range(game.action_count(player))
    )


def classify_iip(game):
    """With / without internal indifferent point, or Reducible when some
    best-response region has measure zero."""
    if is_reducible(game):
        return IIPClass.REDUCIBLE
    for player in (Player.A, Player.B):
        if indifferent_point(game, player).is_internal:
            return IIPClass.WITH_IIP
    return IIPClass.WITHOUT_IIP


def _edge_of(point, exact):
    zeros = [k for k, w in enumerate(point) if (w == 0 if exact else abs(w) <= 1e-12)]
    return zeros


def configuration_pattern(game, player):
    """How the two tie segments of a without-IIP simplex meet its edges.

    "a": one edge carries two segment endpoints and the other two edges one
    each; "b": two edges carry two endpoints each and one edge none. Returns
    None when the segments do not form either pattern (e.g. an endpoint at a
    vertex or a number of segments other than two).
    """
    segs = indifferent_lines(game, player)
    if len(segs) != 2:
        return None
    counts = {0: 0, 1: 0, 2: 0}  # keyed by the vertex opposite the edge
    for seg in segs:
        for p in seg.endpoints:
            zeros = _edge_of(p, game.exact)
            if len(zeros) != 1:
                return None
            counts[zeros[0]] += 1
    profile = sorted(counts.values())
    if profile == [1, 1, 2]:
        return "a"
    if profile == [0, 2, 2]:
        return "b"
    return None


def barycentric_to_cartesian(p):
    """Equilateral embedding used for drawing: e1=(0,0), e2=(1,0), e3=(1/2, sqrt(3)/2)."""
    p = [float(v) for v in p]
    return (p[1] + 0.5 * p[2], math.sqrt(3) / 2 * p[2])
