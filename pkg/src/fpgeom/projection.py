"""Projection of a 3x3 game without internal indifferent points onto the unit square.

Each simplex is projected onto one of its edges. The centre of projection is
the opponent's indifferent point, which lies outside the simplex, or (when the
tie lines are parallel) the common line direction. Every tie line then
collapses to a single point of the edge. The product of the two maps sends the
pair of simplices to [0,1]^2, where the best-response regions become the nine
cells of a 3x3 grid.

Axis conventions: x is player A's projected coordinate and y is player B's.
Columns are B's best-response regions (they live in A's simplex) and rows are
A's regions. Cells are labelled I..IX row-major from the top-left.

The module also holds the face projection used for the symmetric 4x4 case.
"""

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import ConsistencyError, UnsupportedConfiguration
from .game_core import (
    MIXED,
    PURE,
    SADDLE,
    SINK,
    UNCLASSIFIED,
    Player,
    best_response_set,
)
from .geometry import (
    PARALLEL_LINES,
    UNIQUE,
    IIPClass,
    best_response_polygons,
    classify_iip,
    indifferent_lines,
    indifferent_point,
)

CENTRAL = "central"
PARALLEL = "parallel"

ROMAN = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX")

MIXED_SINK = "mixed_sink"
PURE_CONFIG = "pure"


@dataclass(frozen=True)
class ProjectionMap:
    """Projection of ``player``'s simplex onto the edge ``target_edge``.

    The lower-index endpoint of the edge maps to 0 and the other to 1.
    """

    player: Player
    mode: str
    target_edge: tuple
    center: tuple = None
    direction: tuple = None

    @property
    def opposite_vertex(self):
        return 3 - sum(self.target_edge)

    def __call__(self, s):
        return project_point(self, s)


def project_point(pmap, s):
    """Edge coordinate of the image of barycentric point ``s``."""
    s = tuple(s)
    w = pmap.opposite_vertex
    v = pmap.target_edge[1]
    if s[w] == 0:
        return s[v]
    if pmap.mode == CENTRAL:
        c = pmap.center
        denom = c[w] - s[w]
        if denom == 0:
            raise ValueError(f"point {s} is parallel to the target edge as seen from the centre")
        t = c[w] / denom
        return c[v] + t * (s[v] - c[v])
    d = pmap.direction
    t = -s[w] / d[w]
    return s[v] + t * d[v]


def _cross3(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _on_edge(point, w, exact):
    return point[w] == 0 if exact else abs(point[w]) <= 1e-12


def _candidate_map(player, mode, edge, center, direction):
    return ProjectionMap(player, mode, edge, center, direction)


def _edge_is_valid(pmap, segments, exact):
    lo, hi = (0, 1)
    third = tuple(int(k == pmap.opposite_vertex) for k in range(3))
    if exact:
        third = tuple(Fraction(v) for v in third)
    try:
        values = [project_point(pmap, third)]
        values += [project_point(pmap, seg.endpoints[0]) for seg in segments]
    except (ValueError, ZeroDivisionError):
        return False
    return all(lo < v < hi for v in values)


def _projection_for(game, player):
    """Projection of ``player``'s simplex, whose regions belong to the opponent."""
    opponent = player.other
    segments = indifferent_lines(game, opponent)
    if len(segments) != 2:
        raise UnsupportedConfiguration(
            f"expected two tie segments in {player.value}'s simplex, found {len(segments)}",
            {"player": player.value, "segments": len(segments)},
        )
    ip = indifferent_point(game, opponent)
    if ip.status == UNIQUE:
        mode, center, direction = CENTRAL, tuple(ip.point.weights), None
    elif ip.status == PARALLEL_LINES:
        mode, center = PARALLEL, None
        ones = tuple(type(segments[0].coefficients[0])(1) for _ in range(3))
        direction = _cross3(segments[0].coefficients, ones)
    else:
        raise UnsupportedConfiguration("indifferent point is singular without parallel tie lines", {"player": player.value})
    candidates = []
    for edge in itertools.combinations(range(3), 2):
        w = 3 - sum(edge)
        if all(any(_on_edge(p, w, game.exact) for p in seg.endpoints) for seg in segments):
            pmap = _candidate_map(player, mode, edge, center, direction)
            if _edge_is_valid(pmap, segments, game.exact):
                candidates.append(pmap)
    if not candidates:
        raise UnsupportedConfiguration(
            f"no edge of {player.value}'s simplex receives an injective projection",
            {"player": player.value},
        )
    return candidates[0]


def build_projection(game):
    """The pair (projection of A's simplex, projection of B's simplex)."""
    if game.n != 3 or game.m != 3:
        raise UnsupportedConfiguration("square projection needs a 3x3 game", {"n": game.n, "m": game.m})
    cls = classify_iip(game)
    if cls is not IIPClass.WITHOUT_IIP:
        raise UnsupportedConfiguration(f"projection needs a game without IIP, got {cls.value}", {"classification": cls.value})
    return _projection_for(game, Player.A), _projection_for(game, Player.B)


@dataclass(frozen=True)
class Cell:
    label: str
    row: int
    column: int
    x_interval: tuple
    y_interval: tuple
    br_pair: tuple  # (B's action, A's action)
    target: tuple

    @property
    def profile(self):
        """(A's action, B's action), the order used by the dynamics."""
        return (self.br_pair[1], self.br_pair[0])

    def contains(self, point, tol=0.0):
        x, y = point
        return (
            self.x_interval[0] - tol <= x <= self.x_interval[1] + tol
            and self.y_interval[0] - tol <= y <= self.y_interval[1] + tol
        )


@dataclass(frozen=True)
class ProjectedSquare:
    """Nine-cell picture of a game without IIP.

    ``column_actions`` are B's actions left to right and ``row_actions`` are
    A's actions top to bottom. ``vertex_images_x[k]`` is the image of A's pure
    strategy k on the x axis, and likewise for y. ``offsets`` holds M and m
    once the configuration is recognised (see ``canonical_frame``).
    """

    breakpoints_x: tuple
    breakpoints_y: tuple
    column_actions: tuple
    row_actions: tuple
    vertex_images_x: tuple
    vertex_images_y: tuple
    maps: tuple = None
    offsets: dict = field(default=None, compare=False)

    @property
    def widths(self):
        b1, b2 = self.breakpoints_x
        return (b1, b2 - b1, 1 - b2)

    @property
    def heights(self):
        """(P, Q, R), top to bottom."""
        b1, b2 = self.breakpoints_y
        return (1 - b2, b2 - b1, b1)

    def column_bounds(self, c):
        edges = (0,) + tuple(self.breakpoints_x) + (1,)
        return (edges[c], edges[c + 1])

    def row_bounds(self, r):
        edges = (1,) + tuple(reversed(self.breakpoints_y)) + (0,)
        return (edges[r + 1], edges[r])

    def row_target_x(self, r):
        return self.vertex_images_x[self.row_actions[r]]

    def column_target_y(self, c):
        return self.vertex_images_y[self.column_actions[c]]

    def cell(self, row, column):
        return Cell(
            ROMAN[3 * row + column],
            row,
            column,
            self.column_bounds(column),
            self.row_bounds(row),
            (self.column_actions[column], self.row_actions[row]),
            (self.row_target_x(row), self.column_target_y(column)),
        )

    @property
    def cells(self):
        return tuple(self.cell(r, c) for r in range(3) for c in range(3))

    def cell_by_label(self, label):
        k = ROMAN.index(label)
        return self.cell(k // 3, k % 3)

    def locate(self, point):
        """Labels of all closed cells containing ``point``."""
        return [c.label for c in self.cells if c.contains(point)]

    def project(self, x, y):
        if self.maps is None:
            raise ValueError("square has no projection maps attached")
        return (project_point(self.maps[0], x), project_point(self.maps[1], y))

    def as_float(self):
        f = lambda t: tuple(float(v) for v in t)  # noqa: E731
        return replace(
            self,
            breakpoints_x=f(self.breakpoints_x),
            breakpoints_y=f(self.breakpoints_y),
            vertex_images_x=f(self.vertex_images_x),
            vertex_images_y=f(self.vertex_images_y),
        )

    def to_dict(self):
        flt = lambda t: [float(v) for v in t]  # noqa: E731
        return {
            "breakpoints_x": flt(self.breakpoints_x),
            "breakpoints_y": flt(self.breakpoints_y),
            "widths": flt(self.widths),
            "heights": flt(self.heights),
            "offsets": None if self.offsets is None else {k: float(v) for k, v in self.offsets.items()},
            "cells": [
                {
                    "label": c.label,
                    "x_interval": flt(c.x_interval),
                    "y_interval": flt(c.y_interval),
                    "br_pair": list(c.br_pair),
                    "target": flt(c.target),
                }
                for c in self.cells
            ],
        }


def _axis_layout(pmap, polygons):
    """Order the regions along the projected axis.

    Returns (actions in increasing coordinate order, the two breakpoints).
    """
    spans = []
    for poly in polygons:
        values = [project_point(pmap, v) for v in poly.vertices]
        spans.append((min(values), max(values), poly.action))
    spans.sort()
    if len(spans) != 3:
        raise ConsistencyError("expected three regions on each axis")
    order = tuple(s[2] for s in spans)
    breaks = (spans[0][1], spans[1][1])
    return order, breaks


def build_projected_square(game):
    map_a, map_b = build_projection(game)
    exact = game.exact
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    verts = [tuple(one if k == i else zero for k in range(3)) for i in range(3)]
    cols, bx = _axis_layout(map_a, best_response_polygons(game, Player.B))
    rows_up, by = _axis_layout(map_b, best_response_polygons(game, Player.A))
    square = ProjectedSquare(
        breakpoints_x=bx,
        breakpoints_y=by,
        column_actions=cols,
        row_actions=tuple(reversed(rows_up)),
        vertex_images_x=tuple(project_point(map_a, v) for v in verts),
        vertex_images_y=tuple(project_point(map_b, v) for v in verts),
        maps=(map_a, map_b),
    )
    frame = canonical_frame(square)
    if frame is not None:
        square = replace(square, offsets=frame.offsets)
    return square


# ---------------------------------------------------------------------------
# symmetries of the square


@dataclass(frozen=True)
class SquareSymmetry:
    """(x, y) -> swap if requested, then x -> 1-x and/or y -> 1-y."""

    swap: bool = False
    flip_x: bool = False
    flip_y: bool = False

    def apply(self, point):
        x, y = point
        if self.swap:
            x, y = y, x
        if self.flip_x:
            x = 1 - x
        if self.flip_y:
            y = 1 - y
        return (x, y)

    def invert(self, point):
        x, y = point
        if self.flip_x:
            x = 1 - x
        if self.flip_y:
            y = 1 - y
        if self.swap:
            x, y = y, x
        return (x, y)


ALL_SYMMETRIES = tuple(SquareSymmetry(s, fx, fy) for s in (False, True) for fx in (False, True) for fy in (False, True))


@dataclass(frozen=True)
class SquareFrame:
    """Bare grid geometry: breakpoints plus per-row and per-column targets.

    ``row_x`` lists target x values top to bottom; ``column_y`` lists target
    y values left to right. The cell in row r and column c moves toward
    (row_x[r], column_y[c]).
    """

    bx: tuple
    by: tuple
    row_x: tuple
    column_y: tuple
    symmetry: SquareSymmetry = SquareSymmetry()
    kind: str = None
    offsets: dict = None

    @classmethod
    def of(cls, square):
        return cls(
            tuple(square.breakpoints_x),
            tuple(square.breakpoints_y),
            tuple(square.row_target_x(r) for r in range(3)),
            tuple(square.column_target_y(c) for c in range(3)),
        )

    def transformed(self, sym):
        bx, by, row_x, column_y = self.bx, self.by, self.row_x, self.column_y
        if sym.swap:
            # old rows (bottom->top) become columns (left->right)
            bx, by = by, bx
            row_x, column_y = tuple(reversed(column_y)), tuple(reversed(row_x))
        if sym.flip_x:
            bx = (1 - bx[1], 1 - bx[0])
            column_y = tuple(reversed(column_y))
            row_x = tuple(1 - v for v in row_x)
        if sym.flip_y:
            by = (1 - by[1], 1 - by[0])
            row_x = tuple(reversed(row_x))
            column_y = tuple(1 - v for v in column_y)
        return SquareFrame(bx, by, row_x, column_y, sym)

    @property
    def pqr(self):
        return (self.bx[0], self.bx[1] - self.bx[0], 1 - self.bx[1])

    @property
    def PQR(self):
        return (1 - self.by[1], self.by[1] - self.by[0], self.by[0])

    def matches_mixed(self):
        p, q, _ = self.pqr
        _, Q, R = self.PQR
        x3, y3 = self.row_x[2], self.column_y[2]
        ok = (
            self.row_x[:2] == (1, 0)
            and self.column_y[:2] == (1, 0)
            and 0 < x3 < p
            and R < y3 < Q + R
        )
        return ok, {"m": p - x3, "M": Q + R - y3}

    def matches_pure(self):
        p, q, _ = self.pqr
        _, Q, R = self.PQR
        x2, y2 = self.row_x[1], self.column_y[1]
        ok = (
            self.row_x[0] == 0
            and self.row_x[2] == 1
            and self.column_y[0] == 0
            and self.column_y[2] == 1
            and p < x2 < p + q
            and R < y2 < Q + R
        )
        return ok, {"m": x2 - p, "M": y2 - R}


def canonical_frame(square, kind=None):
    """First symmetry image of the square matching a canonical configuration.

    Canonical mixed: the unique equilibrium sits at the upper-left corner of
    Cell V with rows targeting x = (1, 0, p-m) and columns y = (1, 0, Q+R-M).
    Canonical pure: rows target x = (0, p+m, 1) and columns y = (0, R+M, 1),
    so Cell V holds its own target. Returns None when nothing matches.
    """
    base = SquareFrame.of(square)
    kinds = (kind,) if kind else (MIXED_SINK, PURE_CONFIG)
    for k in kinds:
        for sym in ALL_SYMMETRIES:
            frame = base.transformed(sym)
            ok, offsets = frame.matches_mixed() if k == MIXED_SINK else frame.matches_pure()
            if ok:
                return replace(frame, kind=k, offsets=offsets)
    return None


# ---------------------------------------------------------------------------
# equilibrium images and stability


def locate_ne_images(square, eqs, tol=1e-9):
    """Square coordinates of each equilibrium, checked against the cell grid."""
    out = []
    bx = [float(v) for v in square.breakpoints_x]
    by = [float(v) for v in square.breakpoints_y]
    for rec in eqs:
        if rec.kind not in (PURE, MIXED):
            continue
        point = square.project(rec.x, rec.y)
        if rec.kind == MIXED:
            px, py = float(point[0]), float(point[1])
            if not (min(abs(px - b) for b in bx) <= tol and min(abs(py - b) for b in by) <= tol):
                raise ConsistencyError(f"mixed equilibrium image {point} is not a grid vertex")
            centre = square.cell_by_label("V")
            on_corner = any(
                abs(px - float(cx)) <= tol and abs(py - float(cy)) <= tol
                for cx in centre.x_interval
                for cy in centre.y_interval
            )
            if not on_corner:
                raise ConsistencyError(f"mixed equilibrium image {point} is not a vertex of Cell V")
        else:
            i, j = rec.support_a[0], rec.support_b[0]
            cell = next(c for c in square.cells if c.profile == (i, j))
            if not cell.contains(point, tol):
                raise ConsistencyError(f"pure equilibrium image {point} is outside its cell {cell.label}")
        out.append((rec, point))
    return out


@dataclass(frozen=True)
class StabilityClassification:
    record: object
    stability: str
    witness_radius: object
    detail: str = ""


def _toward(point, vertex_index, radius):
    return tuple(v + radius * ((k == vertex_index) - v) for k, v in enumerate(point))


def _single_reply(game, player, opponent_point):
    replies = best_response_set(game, player, opponent_point, tol=0 if game.exact else 1e-12)
    return next(iter(replies)) if len(replies) == 1 else None


def classify_stability(game, record, radius=Fraction(1, 8), square=None, max_halvings=20):
    """Saddle or sink for a mixed equilibrium with 2x2 support.

    Walks a short distance from x toward each supported vertex e_i and reads
    B's reply there, then does the same for y. The equilibrium is a saddle
    when A's reply near y (moving toward B's i') is the action i whose ray
    lands in B's region i', and a sink when it is the other action.
    ``square`` is accepted for symmetry with the rest of the API; the test
    runs in the simplices.
    """
    if record.kind != MIXED or len(record.support_a) != 2 or len(record.support_b) != 2:
        raise UnsupportedConfiguration("stability classes are defined for 2x2-support equilibria")
    rho = Fraction(radius) if game.exact else float(radius)
    x, y = record.x, record.y
    for _ in range(max_halvings + 1):
        a1, a2 = record.support_a
        b_of = {a: _single_reply(game, Player.B, _toward(x, a, rho)) for a in (a1, a2)}
        if None not in b_of.values() and b_of[a1] != b_of[a2] and set(b_of.values()) == set(record.support_b):
            a_of = {b: _single_reply(game, Player.A, _toward(y, b, rho)) for b in record.support_b}
            if None not in a_of.values() and set(a_of.values()) == set(record.support_a):
                if a_of[b_of[a1]] == a1:
                    return StabilityClassification(record, SADDLE, rho)
                return StabilityClassification(record, SINK, rho)
        rho = rho / 2
    return StabilityClassification(record, UNCLASSIFIED, rho, "ambiguous replies after halving the radius")


# ---------------------------------------------------------------------------
# symmetric 4x4 games: projection of the simplex onto one face


SQRT2 = math.sqrt(2.0)
SQRT6 = math.sqrt(6.0)


@dataclass(frozen=True)
class FaceProjection:
    """Central projection of the 4-simplex from the indifferent point onto the
    face where coordinate ``face`` vanishes.

    Face points are drawn with the first remaining vertex at the origin and
    unit side sqrt(2): the second at (sqrt(2), 0) and the third at
    (sqrt(2)/2, sqrt(6)/2).
    """

    a: tuple
    center: tuple
    face: int

    @property
    def kept(self):
        return tuple(k for k in range(4) if k != self.face)

    def project(self, s):
        """Face barycentric coordinates (length 4, zero at ``face``)."""
        c, w = self.center, self.face
        t = c[w] / (c[w] - s[w])
        return tuple(cv + t * (sv - cv) for cv, sv in zip(c, s))

    def chart(self, z):
        k0, k1, k2 = self.kept
        zb, zc = float(z[k1]), float(z[k2])
        return (zb * SQRT2 + zc * SQRT2 / 2, zc * SQRT6 / 2)

    def unchart(self, point):
        u, v = point
        zc = 2 * v / SQRT6
        zb = (u - zc * SQRT2 / 2) / SQRT2
        out = [0.0] * 4
        k0, k1, k2 = self.kept
        out[k0], out[k1], out[k2] = 1 - zb - zc, zb, zc
        return tuple(out)

    def vertex_image(self, k):
        return self.project(tuple(Fraction(int(i == k)) if isinstance(self.center[0], Fraction) else float(i == k) for i in range(4)))

    def region_polygon(self, action):
        """Chart polygon of the projected best-response region of ``action``."""
        hull = _convex_hull([self.chart(self.vertex_image(k)) for k in range(4)])
        rows = [[float(v) for v in r] for r in self.a]
        poly = hull
        for other in range(4):
            if other == action:
                continue
            coeff = [rows[action][i] - rows[other][i] for i in range(4)]
            poly = _clip_chart(poly, lambda pt, c=coeff: sum(ci * zi for ci, zi in zip(c, self.unchart(pt))))
        return poly

    def distance_to_region(self, point, action):
        poly = self.region_polygon(action)
        return _point_polygon_distance(point, poly)


def build_face_projection(game, face=None):
    if game.n != 4 or game.m != 4:
        raise UnsupportedConfiguration("face projection is defined for 4x4 games")
    ip = indifferent_point(game, Player.A)
    if ip.status != UNIQUE or ip.is_internal:
        raise UnsupportedConfiguration("face projection needs an external indifferent point")
    center = tuple(ip.point.weights)
    if face is None:
        face = min(range(4), key=lambda k: center[k])
    if center[face] >= 0:
        raise UnsupportedConfiguration("the projection face must have a negative centre coordinate")
    return FaceProjection(tuple(tuple(r) for r in game.a), center, face)


def _convex_hull(points):
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _clip_chart(poly, value):
    out = []
    vals = [value(p) for p in poly]
    for idx, p in enumerate(poly):
        q = poly[(idx + 1) % len(poly)]
        vp, vq = vals[idx], vals[(idx + 1) % len(poly)]
        if vp >= 0:
            out.append(p)
        if (vp >= 0) != (vq >= 0):
            t = vp / (vp - vq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _point_polygon_distance(point, poly):
    if not poly:
        return math.inf
    px, py = point
    inside = all(
        (b[0] - a[0]) * (py - a[1]) - (b[1] - a[1]) * (px - a[0]) >= 0
        for a, b in zip(poly, poly[1:] + poly[:1])
    )
    if inside and len(poly) >= 3:
        return 0.0
    best = math.inf
    for a, b in zip(poly, poly[1:] + poly[:1]):
        dx, dy = b[0] - a[0], b[1] - a[1]
        length = dx * dx + dy * dy
        t = 0.0 if length == 0 else max(0.0, min(1.0, ((px - a[0]) * dx + (py - a[1]) * dy) / length))
        best = min(best, math.hypot(px - a[0] - t * dx, py - a[1] - t * dy))
    return best
