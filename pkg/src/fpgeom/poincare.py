"""First-return maps of the projected dynamic around Cell V.

Both supported configurations are studied in the canonical frame produced by
``projection.canonical_frame``; every stage of a loop is a similar-triangle
relation between consecutive crossing distances and hence a Moebius map.

Mixed sink (equilibrium at the upper-left corner of Cell V). The section is
the right edge of Cell I, ``{(p, y) : y > Q+R}``, crossed left to right, with
coordinate ``d0 = y - (Q+R)``. Stage distances of the eight-cell loop
I, II, III, VI, V, VIII, VII, IV:

    d1  height above Q+R on x = p+q        d5  depth below R on x = p
    d2  distance right of p+q on y = Q+R   d6  distance left of p on y = R
    d3  depth below Q+R on x = p+q         d7  distance left of p on y = Q+R
    d4  distance right of p on y = R       f   height above Q+R on x = p

Pure equilibrium (Cell V contains its own target). Same section, crossed right
to left; the loop I, IV, VII, VIII, IX, VI, III, II measures the distance of
each crossing from Cell V and ends as soon as a stage distance turns
non-positive (the orbit has entered Cell V).
"""

import math
from dataclasses import dataclass, field

from .dynamics import pbrd_integrate
from .errors import UnsupportedConfiguration
from .projection import MIXED_SINK, PURE_CONFIG, ROMAN, canonical_frame

EIGHT = "8cell"
SIX = "6cell"
FOUR = "4cell"


@dataclass(frozen=True)
class MoebiusMap:
    """d -> (alpha d + beta) / (gamma d + delta)."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    stage_label: str = ""
    geometric_params: tuple = ()

    def __call__(self, d):
        return (self.alpha * d + self.beta) / (self.gamma * d + self.delta)

    def derivative(self, d):
        det = self.alpha * self.delta - self.beta * self.gamma
        return det / (self.gamma * d + self.delta) ** 2

    def inverse(self):
        return MoebiusMap(self.delta, -self.beta, -self.gamma, self.alpha, f"inv({self.stage_label})", self.geometric_params)

    def after(self, inner):
        """The map ``self o inner``."""
        a, b, c, d = self.alpha, self.beta, self.gamma, self.delta
        e, f, g, h = inner.alpha, inner.beta, inner.gamma, inner.delta
        return MoebiusMap(
            a * e + b * g,
            a * f + b * h,
            c * e + d * g,
            c * f + d * h,
            f"{self.stage_label}o{inner.stage_label}",
            tuple(sorted(set(self.geometric_params) | set(inner.geometric_params))),
        )

    def to_dict(self):
        return {
            "stage": self.stage_label,
            "coefficients": [float(self.alpha), float(self.beta), float(self.gamma), float(self.delta)],
            "params": list(self.geometric_params),
        }


def compose(maps):
    """Apply ``maps`` in order: compose([f, g])(d) == g(f(d))."""
    out = maps[0]
    for m in maps[1:]:
        out = m.after(out)
    return out


def mixed_stage_maps(p, q, r, P, Q, R, M, m):
    """The eight stages of the mixed-sink loop."""
    return (
        MoebiusMap(r, -q * (Q + R), 0, q + r, "phi0", ("q", "r", "Q", "R")),
        MoebiusMap(r, 0, 1, M, "phi1", ("r", "M")),
        MoebiusMap(M, 0, 1, p + q, "phi2", ("p", "q", "M")),
        MoebiusMap(p, q * R - p * Q, -1, Q + R, "phi3", ("p", "q", "Q", "R")),
        MoebiusMap(R, 0, 1, m, "phi4", ("R", "m")),
        MoebiusMap(m, 0, 1, P + Q, "phi5", ("P", "Q", "m")),
        MoebiusMap(P, Q * p, 0, P + Q, "phi6", ("p", "P", "Q")),
        MoebiusMap(P, 0, 1, q + r, "phi7", ("q", "r", "P")),
    )


def pure_stage_maps(p, q, r, P, Q, R, M, m):
    """The eight stages of the loop around a pure equilibrium cell."""
    return (
        MoebiusMap(p, 0, 1, Q + R, "phi0", ("p", "Q", "R")),
        MoebiusMap(R, -Q * m, 0, Q + R, "phi1", ("Q", "R", "m")),
        MoebiusMap(R, 0, 1, q + r, "phi2", ("q", "r", "R")),
        MoebiusMap(r, -q * M, 0, q + r, "phi3", ("q", "r", "M")),
        MoebiusMap(r, 0, 1, P + Q, "phi4", ("r", "P", "Q")),
        MoebiusMap(P, -Q * (q - m), 0, P + Q, "phi5", ("q", "P", "Q", "m")),
        MoebiusMap(P, 0, 1, p + q, "phi6", ("p", "q", "P")),
        MoebiusMap(p, -q * (Q - M), 0, p + q, "phi7", ("p", "q", "Q", "M")),
    )


@dataclass(frozen=True)
class ReturnMapAnalysis:
    config_kind: str
    params: dict
    section: tuple  # (x, y_low, y_high) in the canonical frame
    stages: tuple
    composed_map: MoebiusMap
    d_c: float = None
    d_C: float = None
    frame: object = None
    square: object = None
    extras: dict = field(default_factory=dict)

    @property
    def section_length(self):
        return self.section[2] - self.section[1]

    def stage_values(self, d0):
        values = [d0]
        for stage in self.stages:
            values.append(stage(values[-1]))
        return values

    def evaluate(self, d0):
        """Return-map value following the path the orbit actually takes."""
        kind = classify_path_kind(self, d0)
        if self.config_kind == PURE_CONFIG:
            return self.composed_map(d0), kind
        if kind == EIGHT:
            values = self.stage_values(d0)
            if values[4] <= 0:
                return self.extras["alt_six"](values[3]), SIX
            return values[-1], kind
        if kind == SIX:
            return self.extras["six"](d0), kind
        return self.extras["four"](d0), kind

    def to_dict(self):
        return {
            "schema": 1,
            "config_kind": self.config_kind,
            "params": {k: float(v) for k, v in self.params.items()},
            "section": [float(v) for v in self.section],
            "d_c": None if self.d_c is None else float(self.d_c),
            "d_C": None if self.d_C is None else float(self.d_C),
            "stages": [s.to_dict() for s in self.stages],
            "composed": self.composed_map.to_dict(),
            "symmetry": None
            if self.frame is None
            else {"swap": self.frame.symmetry.swap, "flip_x": self.frame.symmetry.flip_x, "flip_y": self.frame.symmetry.flip_y},
        }


def _frame_params(frame):
    p, q, r = (float(v) for v in frame.pqr)
    P, Q, R = (float(v) for v in frame.PQR)
    M, m = float(frame.offsets["M"]), float(frame.offsets["m"])
    return {"p": p, "q": q, "r": r, "P": P, "Q": Q, "R": R, "M": M, "m": m}


def build_return_map(square, config_kind=None, ne_image=None):
    """Instantiate the loop maps for a square in one of the canonical
    configurations (after the symmetry that brings it there)."""
    frame = canonical_frame(square, config_kind)
    if frame is None:
        raise UnsupportedConfiguration(
            "cell arrangement matches neither canonical configuration under any symmetry of the square",
            {"requested": config_kind},
        )
    prm = _frame_params(frame)
    p, q, r, P, Q, R, M, m = (prm[k] for k in ("p", "q", "r", "P", "Q", "R", "M", "m"))
    if min(prm.values()) <= 0:
        raise UnsupportedConfiguration("a width, height or offset is zero", prm)
    if frame.kind == MIXED_SINK:
        expected = (p, Q + R)
        if ne_image is not None:
            got = frame.symmetry.apply(tuple(float(v) for v in ne_image))
            if max(abs(a - b) for a, b in zip(got, expected)) > 1e-9:
                raise UnsupportedConfiguration("equilibrium image is not the upper-left corner of Cell V", {"image": got})
        stages = mixed_stage_maps(p, q, r, P, Q, R, M, m)
        d_C = q * (Q + R) / r
        denom = (q + r) * R - p * Q
        d_c = p * Q * (Q + R) / denom if denom > 0 else math.inf
        tail = compose(list(stages[4:]))  # phi4 .. phi7
        entry = MoebiusMap(q + r, 0, 1, Q + R, "enterV", ("q", "r", "Q", "R"))  # d0 -> e
        six = compose([entry, MoebiusMap(R, -p * Q, 0, Q + R, "exitV_bottom", ("p", "Q", "R")), *stages[4:]])
        depth = MoebiusMap(Q + R, 0, 1, p, "exitV_left", ("p", "Q", "R"))  # e -> depth below Q+R on x=p
        climb = MoebiusMap(p, 0, 1, P, "cellIV", ("p", "P"))  # depth -> d7
        four = compose([entry, depth, climb, stages[7]])
        # alternate six-cell loop: V entered from the right, left through x = p
        alt_depth = MoebiusMap(p, q * (Q + R), 0, p + q, "altV", ("p", "q", "Q", "R"))  # d3 -> depth
        alt = compose([alt_depth, climb, stages[7]])
        extras = {"six": six, "four": four, "alt_six": alt, "tail": tail}
        section = (p, Q + R, 1.0)
        return ReturnMapAnalysis(MIXED_SINK, prm, section, stages, compose(list(stages)), d_c, d_C, frame, square, extras)
    stages = pure_stage_maps(p, q, r, P, Q, R, M, m)
    # smallest d0 for which every stage distance stays positive
    thresholds = []
    prefix = []
    for k, stage in enumerate(stages):
        prefix.append(stage)
        if k % 2 == 1:
            zero_at = compose(prefix).inverse()(0.0)
            thresholds.append(zero_at)
    section = (p, Q + R, 1.0)
    analysis = ReturnMapAnalysis(PURE_CONFIG, prm, section, stages, compose(list(stages)), None, max(thresholds), frame, square)
    return analysis


def classify_path_kind(analysis, d0):
    if analysis.config_kind == PURE_CONFIG:
        return EIGHT if d0 > analysis.d_C else "enters_V"
    if d0 > analysis.d_C:
        return EIGHT
    if d0 > analysis.d_c:
        return SIX
    return FOUR


# ---------------------------------------------------------------------------
# simulation oracle


def _canonical_cell(frame, point):
    x, y = point
    bx, by = frame.bx, frame.by
    col = 0 if x < bx[0] else (1 if x < bx[1] else 2)
    row = 0 if y > by[1] else (1 if y > by[0] else 2)
    return ROMAN[3 * row + col]


def simulate_first_return(analysis, d0, max_events=64):
    """Run the projected dynamic from the section point at distance ``d0``
    and report where it next crosses the section, with the canonical cells
    visited on the way. Returns (distance or None, list of cell labels)."""
    frame = analysis.frame
    px, y_low, _ = analysis.section
    sign = 1.0 if analysis.config_kind == MIXED_SINK else -1.0
    start = frame.symmetry.invert((px, y_low + d0))
    seen = []

    def to_canon(pt):
        return frame.symmetry.apply(pt)

    def stop(idx, prev, state, crossed):
        a, b = to_canon(prev), to_canon(state)
        if abs(b[0] - px) <= 1e-12 and (b[0] - a[0]) * sign > 0 and b[1] > y_low:
            seen.append(b)
            return True
        return False

    traj = pbrd_integrate(analysis.square, start, max_events=max_events, stop=stop)
    path = []
    events = traj.events
    for k in range(len(events) - 1):
        mid = tuple((u + v) / 2 for u, v in zip(to_canon(events[k].state), to_canon(events[k + 1].state)))
        label = _canonical_cell(frame, mid)
        if not path or path[-1] != label:
            path.append(label)
    if traj.terminal == "stopped":
        return seen[-1][1] - y_low, path
    return None, path


# ---------------------------------------------------------------------------
# contraction


@dataclass(frozen=True)
class ContractionCertificate:
    ok: bool
    sup_derivative: float
    min_gap: float
    analytic_bound: float
    counterexample: float = None
    iterations_to_exit: int = None
    orbit: tuple = ()

    def to_dict(self):
        return {
            "ok": self.ok,
            "sup_derivative": self.sup_derivative,
            "min_gap": self.min_gap,
            "analytic_bound": self.analytic_bound,
            "counterexample": self.counterexample,
            "iterations_to_exit": self.iterations_to_exit,
            "orbit": list(self.orbit),
        }


def _derivative(analysis, d0):
    values = analysis.stage_values(d0)
    out = 1.0
    for stage, v in zip(analysis.stages, values):
        out *= stage.derivative(v)
    return out


def verify_contraction(analysis, samples=200, max_iterations=10_000):
    """Sample the loop map on its eight-cell range and iterate it from the
    top of the section until the orbit leaves that range."""
    prm = analysis.params
    p, q, r, P, Q, R = (prm[k] for k in ("p", "q", "r", "P", "Q", "R"))
    lo, hi = analysis.d_C, analysis.section_length
    if analysis.config_kind == MIXED_SINK:
        bound = P * (q + r) / (q + r) ** 2 * (P / (P + Q)) ** 2 * (r / (q + r)) ** 2
    else:
        bound = p * P * r * R / ((p + q) * (P + Q) * (q + r) * (Q + R))
    sup_d, min_gap, counter = 0.0, math.inf, None
    if hi > lo:
        for k in range(1, samples + 1):
            d = lo + (hi - lo) * k / samples
            fd = analysis.composed_map(d)
            der = _derivative(analysis, d)
            sup_d = max(sup_d, der)
            gap = d - fd
            min_gap = min(min_gap, gap)
            if not (0 < der < 1) or gap <= 0:
                counter = d if counter is None else counter
            if analysis.config_kind == PURE_CONFIG:
                outer = compose([analysis.stages[i] for i in (0, 2, 4, 6)])
                if not fd < outer(d) < d:
                    counter = d if counter is None else counter
    orbit = [hi]
    steps = None
    for n in range(1, max_iterations + 1):
        nxt = analysis.composed_map(orbit[-1])
        orbit.append(nxt)
        if nxt <= analysis.d_C:
            steps = n
            break
        if nxt >= orbit[-2]:
            counter = orbit[-2] if counter is None else counter
            break
    ok = counter is None and steps is not None
    if analysis.config_kind == MIXED_SINK:
        ok = ok and sup_d < 1
    return ContractionCertificate(ok, sup_d, min_gap, bound, counter, steps, tuple(orbit[:50]))


def distance_to_cell(square, point, label="V"):
    """Euclidean distance from a square point to a closed cell (zero inside)."""
    cell = square.cell_by_label(label)
    (x0, x1), (y0, y1) = cell.x_interval, cell.y_interval
    x, y = (float(v) for v in point)
    dx = max(float(x0) - x, 0.0, x - float(x1))
    dy = max(float(y0) - y, 0.0, y - float(y1))
    return math.hypot(dx, dy)
