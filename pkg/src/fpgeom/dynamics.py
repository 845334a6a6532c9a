"""Learning dynamics integrated exactly, event by event.

Inside a product of best-response regions both CFP and BRD move the state in
a straight line toward the pure profile of best replies, so
``x(s) = x + s (e_i - x)`` with one shared parameter s for both players. The
only thing that differs between the two is the clock: CFP started at ``t0``
reaches parameter s at ``t0 / (1 - s)``, BRD at ``t0 - log(1 - s)``. Every
event is the earliest s at which some other action catches up with a current
best reply, found in closed form.
"""

import csv
import io
import math
from dataclasses import dataclass, field

from .game_core import MIXED, PURE, CONTINUUM, SADDLE, SINK

DFP = "DFP"
CFP = "CFP"
BRD = "BRD"
PBRD = "PBRD"
SYM_BRD = "SymBRD"

CONVERGED_TO_NE = "ConvergedToNE"
CONVERGED_TO_POINT = "ConvergedToPoint"
LIMIT_CYCLE = "LimitCycle"
APPROACHES_CONTINUUM = "ApproachesContinuum"
DIVERGENT = "Divergent"
UNDETERMINED = "Undetermined"

# terminal reasons reported by the integrators
REACHED_PROFILE = "reached_profile"
STATIONARY = "stationary"
STALLED = "stalled"
MAX_EVENTS = "max_events"
HORIZON = "horizon"
STEPS = "steps"
EXTRAPOLATED = "extrapolated"
CLOCK_OVERFLOW = "clock_overflow"

DEFAULT_MAX_EVENTS = 5000
STALL_STEP = 1e-14
STALL_RUN = 8
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Event:
    time: float
    state: tuple
    profile: tuple
    boundary: str = None
    skipped: int = 0


@dataclass(frozen=True)
class TrajectoryRecord:
    dynamic_kind: str
    events: tuple
    terminal: str
    sizes: tuple
    limit_state: tuple = None

    def split(self, state):
        """Break a flat state into per-player parts."""
        parts, start = [], 0
        for size in self.sizes:
            parts.append(tuple(state[start : start + size]))
            start += size
        return tuple(parts)

    @property
    def final_state(self):
        return self.limit_state if self.limit_state is not None else self.events[-1].state

    def state_at(self, index, fraction):
        """Point a given fraction of the way along the chord after event ``index``."""
        ev = self.events[index]
        nxt = self.events[index + 1] if index + 1 < len(self.events) else None
        end = nxt.state if nxt is not None else self.final_state
        return tuple(a + fraction * (b - a) for a, b in zip(ev.state, end))


# ---------------------------------------------------------------------------
# helpers


def _floats(matrix):
    return [[float(v) for v in row] for row in matrix]


def _vec(v):
    return [float(w) for w in v]


def _argmax_set(values):
    top = max(values)
    band = TIE_RTOL * max(1.0, abs(top))
    return [k for k, v in enumerate(values) if v >= top - band]


def _row_payoffs(a, y):
    return [sum(r[l] * y[l] for l in range(len(y))) for r in a]


def _col_payoffs(b, x):
    m = len(b[0])
    return [sum(x[k] * b[k][l] for k in range(len(x))) for l in range(m)]


def _advance(v, target, lam):
    out = [(1.0 - lam) * w for w in v]
    out[target] += lam
    return out


def _pick_profile(a, b, tied_a, tied_b):
    """Lowest-index pair whose motion keeps both choices optimal.

    Moving toward (e_i, e_j) changes A's payoff to action k at rate
    a[k][j] - u_k, so among tied actions i stays best iff a[i][j] is maximal;
    likewise for B.
    """
    for i in sorted(tied_a):
        for j in sorted(tied_b):
            if all(a[i][j] >= a[k][j] for k in tied_a) and all(b[i][j] >= b[i][l] for l in tied_b):
                return i, j
    return min(tied_a), min(tied_b)


def _is_equilibrium(x, y, ua, ub):
    top_a, top_b = max(ua), max(ub)
    band_a = 1e-12 * max(1.0, abs(top_a))
    band_b = 1e-12 * max(1.0, abs(top_b))
    return all(w <= 1e-15 or ua[k] >= top_a - band_a for k, w in enumerate(x)) and all(
        w <= 1e-15 or ub[l] >= top_b - band_b for l, w in enumerate(y)
    )


# ---------------------------------------------------------------------------
# two-population event engine (CFP and BRD)
#
# The engine works with play counts X = t x and Y = t y (CFP time t). Inside
# a cell both counts grow along one coordinate at unit rate, so payoffs are
# linear in the elapsed time and each crossing time is a single division.

RESCALE_AT = 1e200
LOG_RESCALE = math.log(RESCALE_AT)
PERIOD_RTOL = 1e-9


class _Counts:
    def __init__(self, a, b, x0, y0, t0):
        self.a, self.b = a, b
        self.t = float(t0)
        self.log_scale = 0.0  # counts are stored divided by exp(log_scale)
        self.X = [t0 * v for v in x0]
        self.Y = [t0 * v for v in y0]
        self.refresh()

    def refresh(self):
        self.UA = _row_payoffs(self.a, self.Y)
        self.UB = _col_payoffs(self.b, self.X)

    def advance(self, i, j, delta):
        a, b = self.a, self.b
        self.X[i] += delta
        self.Y[j] += delta
        self.t += delta
        for k in range(len(self.UA)):
            self.UA[k] += delta * a[k][j]
        for l in range(len(self.UB)):
            self.UB[l] += delta * b[i][l]

    def rescale(self):
        f = 1.0 / RESCALE_AT
        self.X = [v * f for v in self.X]
        self.Y = [v * f for v in self.Y]
        self.t *= f
        self.log_scale += LOG_RESCALE
        self.refresh()

    def log_time(self):
        return math.log(self.t) + self.log_scale

    def state(self):
        return tuple(v / self.t for v in self.X) + tuple(v / self.t for v in self.Y)


def _loop_support(profiles):
    """Supports when the last four profiles walk around a 2x2 block."""
    rows = {p[0] for p in profiles}
    cols = {p[1] for p in profiles}
    if len(profiles) == 4 and len(set(profiles)) == 4 and len(rows) == 2 and len(cols) == 2:
        return tuple(sorted(rows)), tuple(sorted(cols))
    return None


def _try_extrapolate(counts, history, target_distance):
    """Skip whole loops of an exactly periodic 2x2 cycle.

    In count space one loop around a 2x2 block returns every payoff
    difference inside the block to its old value, so the loop can be repeated
    N times by adding N copies of its count increments. Actions outside the
    block must lose ground over the loop and stay strictly worse throughout.
    Returns the number of loops skipped (0 when the test fails).
    """
    if len(history) < 5:
        return 0
    last = history[-5:]
    support = _loop_support([h["profile"] for h in last[1:]])
    if support is None or last[0]["profile"] != last[-1]["profile"]:
        return 0
    (i1, i2), (j1, j2) = support
    first, now = last[0], last[-1]
    if first["log_scale"] != now["log_scale"]:
        return 0
    scale = max(abs(v) for v in now["UA"] + now["UB"]) + 1.0
    da_old, da_new = first["UA"][i1] - first["UA"][i2], now["UA"][i1] - now["UA"][i2]
    db_old, db_new = first["UB"][j1] - first["UB"][j2], now["UB"][j1] - now["UB"][j2]
    if abs(da_old - da_new) > PERIOD_RTOL * scale or abs(db_old - db_new) > PERIOD_RTOL * scale:
        return 0
    for key, block in (("UA", (i1, i2)), ("UB", (j1, j2))):
        size = len(now[key])
        for k in range(size):
            if k in block:
                continue
            margins = [h[key][k] - max(h[key][block[0]], h[key][block[1]]) for h in last]
            if max(margins) >= 0 or margins[-1] > margins[0]:
                return 0
    loop_t = now["t"] - first["t"]
    if loop_t <= 0:
        return 0
    dX = [u - v for u, v in zip(now["X"], first["X"])]
    dY = [u - v for u, v in zip(now["Y"], first["Y"])]
    star = [v / loop_t for v in dX] + [v / loop_t for v in dY]
    state = counts.state()
    dist = max(abs(u - v) for u, v in zip(state, star))
    if dist <= target_distance:
        return 0
    loops = math.ceil((dist * counts.t / target_distance - counts.t) / loop_t)
    if loops < 2:
        return 0
    counts.X = [u + loops * v for u, v in zip(counts.X, dX)]
    counts.Y = [u + loops * v for u, v in zip(counts.Y, dY)]
    counts.t += loops * loop_t
    counts.refresh()
    return loops


def _integrate(kind, game, x0, y0, t0, horizon, max_events, extrapolate, target_distance):
    a, b = _floats(game.a), _floats(game.b)
    n, m = len(a), len(a[0])
    x, y = _vec(x0), _vec(y0)
    sizes = (n, m)
    counts = _Counts(a, b, x, y, 1.0)
    log_t0 = 0.0

    def clock():
        lt = counts.log_time() - log_t0
        if kind == CFP:
            return t0 * math.exp(lt) if lt < 700 else math.inf
        return t0 + lt

    state = counts.state()
    ua, ub = counts.UA, counts.UB
    if _is_equilibrium(x, y, ua, ub) and (len(_argmax_set(ua)) > 1 or len(_argmax_set(ub)) > 1):
        ev = Event(clock(), state, (min(_argmax_set(ua)), min(_argmax_set(ub))))
        return TrajectoryRecord(kind, (ev,), STATIONARY, sizes, state)
    i, j = _pick_profile(a, b, _argmax_set(ua), _argmax_set(ub))
    events = [Event(clock(), state, (i, j))]
    history = []
    small_steps = 0
    skipped = 0
    finish_at = None
    terminal, limit = MAX_EVENTS, None
    while len(events) < max_events:
        if finish_at is not None and len(events) >= finish_at:
            terminal = EXTRAPOLATED
            break
        UA, UB = counts.UA, counts.UB
        crossings = []
        for k in range(n):
            if k != i:
                h = a[i][j] - a[k][j]
                if h < 0:
                    crossings.append((max(UA[i] - UA[k], 0.0) / -h, "A", k))
        for l in range(m):
            if l != j:
                h = b[i][j] - b[i][l]
                if h < 0:
                    crossings.append((max(UB[j] - UB[l], 0.0) / -h, "B", l))
        if not crossings:
            terminal = REACHED_PROFILE
            limit = tuple(float(k == i) for k in range(n)) + tuple(float(l == j) for l in range(m))
            break
        delta = min(c[0] for c in crossings)
        band = delta * 1e-12 + 1e-15 * counts.t
        hits = [c for c in crossings if c[0] <= delta + band]
        counts.advance(i, j, delta)
        now = clock()
        if now == math.inf:
            terminal = CLOCK_OVERFLOW
            break
        if horizon is not None and now > horizon:
            terminal = HORIZON
            break
        tied_a = {i} | {k for _, who, k in hits if who == "A"}
        tied_b = {j} | {l for _, who, l in hits if who == "B"}
        ni, nj = _pick_profile(a, b, tied_a, tied_b)
        parts = []
        if ni != i:
            parts.append(f"A:{min(i, ni)}-{max(i, ni)}")
        if nj != j:
            parts.append(f"B:{min(j, nj)}-{max(j, nj)}")
        i, j = ni, nj
        if counts.t > RESCALE_AT:
            counts.rescale()
        new_state = counts.state()
        step = max(abs(p - q) for p, q in zip(new_state, state))
        state = new_state
        events.append(Event(now, state, (i, j), "+".join(parts) or None, skipped))
        skipped = 0
        small_steps = small_steps + 1 if step < STALL_STEP else 0
        if small_steps >= STALL_RUN:
            terminal = STALLED
            break
        if extrapolate:
            history.append(
                {
                    "profile": (i, j),
                    "X": list(counts.X),
                    "Y": list(counts.Y),
                    "t": counts.t,
                    "UA": list(counts.UA),
                    "UB": list(counts.UB),
                    "log_scale": counts.log_scale,
                }
            )
            del history[:-5]
            loops = _try_extrapolate(counts, history, target_distance)
            if loops:
                skipped = 4 * loops
                history.clear()
                state = counts.state()
                now = clock()
                if now == math.inf or (horizon is not None and now > horizon):
                    terminal = CLOCK_OVERFLOW if now == math.inf else HORIZON
                    break
                # the jump lands exactly on an event of the same profile
                events.append(Event(now, state, (i, j), events[-1].boundary, skipped))
                skipped = 0
                finish_at = len(events) + 4
    return TrajectoryRecord(kind, tuple(events), terminal, sizes, limit)


EXTRAPOLATE_TO = 1e-9


def cfp_integrate(game, x0, y0, t0=1.0, horizon=None, max_events=DEFAULT_MAX_EVENTS, extrapolate=True, target_distance=EXTRAPOLATE_TO):
    """Continuous-time fictitious play from (x0, y0) at time ``t0``.

    With ``extrapolate`` an exactly periodic loop around a 2x2 block is
    repeated in closed form until the state is within ``target_distance`` of
    the loop's centre; the event that follows carries the number of skipped
    events in ``Event.skipped``.
    """
    return _integrate(CFP, game, x0, y0, t0, horizon, max_events, extrapolate, target_distance)


def brd_integrate(game, x0, y0, horizon=None, max_events=DEFAULT_MAX_EVENTS, t0=0.0, extrapolate=True, target_distance=EXTRAPOLATE_TO):
    """Best-response dynamic; same orbit as CFP, time ``t0 + log(t_cfp)``."""
    return _integrate(BRD, game, x0, y0, t0, horizon, max_events, extrapolate, target_distance)


# ---------------------------------------------------------------------------
# discrete fictitious play


def dfp_run(game, x0, y0, steps):
    """Discrete fictitious play: each step both players best-reply to the
    other's running average, ties going to the lowest index."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    a, b = _floats(game.a), _floats(game.b)
    n, m = len(a), len(a[0])
    x, y = _vec(x0), _vec(y0)
    events = []
    prev = None
    for t in range(1, steps + 1):
        ua, ub = _row_payoffs(a, y), _col_payoffs(b, x)
        i = max(range(n), key=lambda k: (ua[k], -k))
        j = max(range(m), key=lambda k: (ub[k], -k))
        if (i, j) != prev:
            events.append(Event(float(t), tuple(x + y), (i, j)))
            prev = (i, j)
        w = t / (t + 1.0)
        x = [w * v for v in x]
        y = [w * v for v in y]
        x[i] += 1.0 / (t + 1.0)
        y[j] += 1.0 / (t + 1.0)
    final = tuple(x + y)
    return TrajectoryRecord(DFP, tuple(events), STEPS, (n, m), final)


# ---------------------------------------------------------------------------
# projected dynamic on the square


def _square_arrays(square):
    sq = square.as_float()
    bx = (0.0,) + tuple(sq.breakpoints_x) + (1.0,)
    by_desc = (1.0,) + tuple(reversed(sq.breakpoints_y)) + (0.0,)
    row_x = [sq.row_target_x(r) for r in range(3)]
    col_y = [sq.column_target_y(c) for c in range(3)]
    return bx, by_desc, row_x, col_y


def _pick_cell(x, y, bx, by_desc, row_x, col_y):
    cols = [c for c in range(3) if bx[c] <= x <= bx[c + 1]]
    rows = [r for r in range(3) if by_desc[r + 1] <= y <= by_desc[r]]
    for r in rows:
        for c in cols:
            tx, ty = row_x[r], col_y[c]
            ok_x = not ((x == bx[c] and tx < x) or (x == bx[c + 1] and tx > x))
            ok_y = not ((y == by_desc[r + 1] and ty < y) or (y == by_desc[r] and ty > y))
            if ok_x and ok_y:
                return r, c
    return rows[0], cols[0]


def pbrd_integrate(square, p0, max_events=DEFAULT_MAX_EVENTS, horizon=None, stop=None):
    """Projected best-response dynamic on [0,1]^2.

    ``stop(event_index, prev_state, state, crossed)`` may end the run early;
    ``crossed`` lists tuples (axis, breakpoint index, direction).
    """
    bx, by_desc, row_x, col_y = _square_arrays(square)
    inner_x = bx[1:3]
    inner_y = (by_desc[2], by_desc[1])
    x, y = float(p0[0]), float(p0[1])
    rows_a, cols_b = square.row_actions, square.column_actions
    r, c = _pick_cell(x, y, bx, by_desc, row_x, col_y)
    tau = 0.0
    events = [Event(tau, (x, y), (rows_a[r], cols_b[c]))]
    terminal, limit = MAX_EVENTS, None
    small_steps = 0
    while len(events) < max_events:
        tx, ty = row_x[r], col_y[c]
        options = []
        lo_x, hi_x = bx[c], bx[c + 1]
        lo_y, hi_y = by_desc[r + 1], by_desc[r]
        if tx > hi_x and hi_x < 1.0:
            options.append(((hi_x - x) / (tx - x), "x", hi_x, 1))
        if tx < lo_x and lo_x > 0.0:
            options.append(((lo_x - x) / (tx - x), "x", lo_x, -1))
        if ty > hi_y and hi_y < 1.0:
            options.append(((hi_y - y) / (ty - y), "y", hi_y, 1))
        if ty < lo_y and lo_y > 0.0:
            options.append(((lo_y - y) / (ty - y), "y", lo_y, -1))
        lam = min((o[0] for o in options), default=math.inf)
        if lam >= 1.0:
            terminal, limit = REACHED_PROFILE, (tx, ty)
            break
        new_tau = tau - math.log1p(-lam)
        if horizon is not None and new_tau > horizon:
            terminal = HORIZON
            break
        band = lam * 1e-12 + 1e-15
        hits = [o for o in options if o[0] <= lam + band]
        prev = (x, y)
        x, y = x + lam * (tx - x), y + lam * (ty - y)
        crossed = []
        for _, axis, value, sign in hits:
            if axis == "x":
                x = value
                crossed.append(("x", inner_x.index(value), sign))
            else:
                y = value
                crossed.append(("y", inner_y.index(value), sign))
        tau = new_tau
        r, c = _pick_cell(x, y, bx, by_desc, row_x, col_y)
        label = "+".join(f"{a}:{k}" for a, k, _ in crossed)
        events.append(Event(tau, (x, y), (rows_a[r], cols_b[c]), label))
        if stop is not None and stop(len(events) - 1, prev, (x, y), crossed):
            terminal = "stopped"
            break
        step = max(abs(x - prev[0]), abs(y - prev[1]))
        small_steps = small_steps + 1 if step < STALL_STEP else 0
        if small_steps >= STALL_RUN:
            terminal = STALLED
            break
    return TrajectoryRecord(PBRD, tuple(events), terminal, (2,), limit)


def cell_label(square, profile):
    """Roman label of the cell whose best-reply pair is ``profile`` (A, B)."""
    return next(c.label for c in square.cells if c.profile == tuple(profile))


# ---------------------------------------------------------------------------
# symmetric games: one population


def _pick_sym(a, tied):
    for i in sorted(tied):
        if all(a[i][i] >= a[k][i] for k in tied):
            return i
    return min(tied)


def sym_brd_integrate(a_matrix, x0, horizon=None, max_events=DEFAULT_MAX_EVENTS, stop=None, first_action=None):
    """BRD of a symmetric game where both players share the state x.

    ``first_action`` overrides the initial best reply (useful when starting on
    a boundary). ``stop(event_index, state, previous_action, action)`` may end
    the run early.
    """
    a = _floats(a_matrix)
    n = len(a)
    x = _vec(x0)
    u = _row_payoffs(a, x)
    i = first_action if first_action is not None else _pick_sym(a, _argmax_set(u))
    tau = 0.0
    events = [Event(tau, tuple(x), (i, i))]
    terminal, limit = MAX_EVENTS, None
    small_steps = 0
    while len(events) < max_events:
        crossings = []
        for k in range(n):
            if k != i:
                h = a[i][i] - a[k][i]
                if h < 0:
                    g = max(u[i] - u[k], 0.0)
                    crossings.append((g / (g - h), k))
        lam = min((c[0] for c in crossings), default=math.inf)
        if lam >= 1.0:
            terminal, limit = REACHED_PROFILE, tuple(float(k == i) for k in range(n))
            break
        new_tau = tau - math.log1p(-lam)
        if horizon is not None and new_tau > horizon:
            terminal = HORIZON
            break
        band = lam * 1e-12 + 1e-15
        tied = {i} | {k for lv, k in crossings if lv <= lam + band}
        prev = tuple(x)
        x = _advance(x, i, lam)
        tau = new_tau
        u = _row_payoffs(a, x)
        ni = _pick_sym(a, tied)
        boundary = f"A:{min(i, ni)}-{max(i, ni)}" if ni != i else None
        events.append(Event(tau, tuple(x), (ni, ni), boundary))
        old, i = i, ni
        if stop is not None and stop(len(events) - 1, tuple(x), old, ni):
            terminal = "stopped"
            break
        step = max(abs(p - q) for p, q in zip(x, prev))
        small_steps = small_steps + 1 if step < STALL_STEP else 0
        if small_steps >= STALL_RUN:
            terminal = STALLED
            break
    return TrajectoryRecord(SYM_BRD, tuple(events), terminal, (n,), limit)


def face_first_return(game, start_chart, section=(0, 1), face=None, max_events=200, snap=True):
    """Symmetric BRD started on the projected tie line between the two
    ``section`` actions, entering ``section[1]``'s region. Returns the chart
    point where the orbit next crosses that line in the same direction, the
    sequence of replies in between and both distances to the region of the
    action whose region the start point borders (the face's fourth action by
    default).
    """
    from .projection import build_face_projection

    proj = build_face_projection(game, face)
    a = _floats(game.a)
    z = list(proj.unchart(start_chart))
    if snap:
        z = _snap_to_tie(a, z, section, proj)
    crossings = []

    def stop(idx, state, old, new):
        crossings.append((old, new))
        return (old, new) == tuple(section)

    traj = sym_brd_integrate(game.a, z, max_events=max_events, stop=stop, first_action=section[1])
    start = proj.chart(proj.project(z))
    end = proj.chart(proj.project(traj.events[-1].state)) if traj.terminal == "stopped" else None
    watch = proj.face
    return {
        "projection": proj,
        "section_actions": tuple(section),
        "start": start,
        "return_point": end,
        "pattern": [ev.profile[0] for ev in traj.events],
        "start_distance": proj.distance_to_region(start, watch),
        "return_distance": None if end is None else proj.distance_to_region(end, watch),
        "trajectory": traj,
    }


def _snap_to_tie(a, z, section, proj):
    """Closest chart point on the tie line of the two ``section`` actions."""
    j, k = section
    coeff = [a[j][i] - a[k][i] for i in range(len(a))]
    # move within the face plane along the chart gradient of the tie function
    base = proj.chart(z)
    value = sum(c * w for c, w in zip(coeff, z))
    grad = []
    for axis in range(2):
        shifted = list(base)
        shifted[axis] += 1.0
        zz = proj.unchart(shifted)
        grad.append(sum(c * w for c, w in zip(coeff, zz)) - value)
    norm = grad[0] ** 2 + grad[1] ** 2
    point = (base[0] - value * grad[0] / norm, base[1] - value * grad[1] / norm)
    return list(proj.unchart(point))


# ---------------------------------------------------------------------------
# limit classification


@dataclass(frozen=True)
class LimitClassification:
    tag: str
    record: object = None
    point: tuple = None
    period: tuple = None
    segment: tuple = None
    evidence: dict = field(default_factory=dict)

    @property
    def stability_from_tail(self):
        count = self.evidence.get("tail_profile_count")
        return {1: PURE, 2: SADDLE, 4: SINK}.get(count)

    def to_dict(self):
        out = {"tag": self.tag, "evidence": self.evidence}
        if self.record is not None:
            out["equilibrium"] = self.record.to_dict()
        if self.point is not None:
            out["point"] = list(self.point)
        if self.period is not None:
            out["period"] = [list(p) for p in self.period]
        return out


def _dist(u, v):
    return max(abs(float(a) - float(b)) for a, b in zip(u, v))


def _segment_distance(point, p, q):
    p = [float(v) for v in p]
    q = [float(v) for v in q]
    d = [b - a for a, b in zip(p, q)]
    dd = sum(v * v for v in d)
    t = 0.0 if dd == 0 else max(0.0, min(1.0, sum((w - a) * v for w, a, v in zip(point, p, d)) / dd))
    return max(abs(w - (a + t * v)) for w, a, v in zip(point, p, d))


def _period(profiles):
    size = len(profiles)
    for period in range(1, size // 2 + 1):
        if all(profiles[k] == profiles[k - period] for k in range(period, size)):
            return period
    return None


def classify_limit(traj, eqs, epsilon_conv=1e-6, tail_window=200, tail_radius=1e-3):
    """Read off the long-run behaviour of a trajectory.

    Convergence to an isolated equilibrium needs the final state within
    ``epsilon_conv`` and, among the tail events within ``tail_radius`` of it,
    one, two or four action profiles (pure, saddle, sink). A continuum is
    approached when the tail is within ``epsilon_conv`` of an equilibrium
    segment while still spread by more than ten times that. A limit cycle is
    a periodic tail profile sequence whose states stay spread out.
    """
    final = tuple(float(v) for v in traj.final_state)
    tail = traj.events[-tail_window:]
    spread = max((_dist(ev.state, final) for ev in tail), default=0.0)
    evidence = {
        "final_state": list(final),
        "tail_events": len(tail),
        "tail_displacement": spread,
        "terminal": traj.terminal,
    }
    points = [rec for rec in eqs if rec.kind in (PURE, MIXED)]
    segments = [rec for rec in eqs if rec.kind == CONTINUUM and rec.endpoints]

    for rec in segments:
        (x1, y1), (x2, y2) = rec.endpoints
        dists = [_segment_distance(ev.state, tuple(x1) + tuple(y1), tuple(x2) + tuple(y2)) for ev in tail]
        dist = max(dists + [_segment_distance(final, tuple(x1) + tuple(y1), tuple(x2) + tuple(y2))])
        if dist < epsilon_conv and spread > 10 * epsilon_conv:
            evidence["segment_distance"] = dist
            return LimitClassification(APPROACHES_CONTINUUM, record=rec, segment=rec.endpoints, evidence=evidence)

    if points:
        best = min(points, key=lambda rec: _dist(tuple(rec.x) + tuple(rec.y), final))
        target = tuple(float(v) for v in tuple(best.x) + tuple(best.y))
        dist = _dist(target, final)
        evidence["equilibrium_distance"] = dist
        if dist < epsilon_conv:
            near = {ev.profile for ev in tail if _dist(ev.state, target) <= tail_radius}
            near.add(traj.events[-1].profile)
            evidence["tail_profile_count"] = len(near)
            evidence["tail_profiles"] = sorted(list(p) for p in near)
            if len(near) in (1, 2, 4):
                return LimitClassification(CONVERGED_TO_NE, record=best, point=target, evidence=evidence)
            return LimitClassification(CONVERGED_TO_POINT, point=final, evidence=evidence)

    profiles = [ev.profile for ev in tail]
    evidence["tail_profile_count"] = len(set(profiles))
    period = _period(profiles) if len(profiles) >= 4 else None
    if period is not None and spread > 10 * epsilon_conv and len(set(profiles)) > 1:
        return LimitClassification(LIMIT_CYCLE, period=tuple(profiles[-period:]), evidence=evidence)
    if spread <= epsilon_conv and traj.terminal in (REACHED_PROFILE, STATIONARY, STALLED, EXTRAPOLATED):
        return LimitClassification(CONVERGED_TO_POINT, point=final, evidence=evidence)
    if points and len(tail) >= 4:
        half = len(tail) // 2
        targets = [tuple(float(v) for v in tuple(r.x) + tuple(r.y)) for r in points]
        near_first = min(_dist(ev.state, t) for ev in tail[:half] for t in targets)
        near_last = min(_dist(ev.state, t) for ev in tail[half:] for t in targets)
        if near_last > near_first and spread > 10 * epsilon_conv:
            return LimitClassification(DIVERGENT, evidence=evidence)
    return LimitClassification(UNDETERMINED, evidence=evidence)


# ---------------------------------------------------------------------------
# CSV


def trajectory_rows(traj, dense_per_segment=0):
    """Header and rows of the trajectory CSV.

    Event rows carry ``dense = 0``; with ``dense_per_segment`` > 0 evenly
    spaced chord points are added between events and flagged ``dense = 1``.
    """
    if traj.dynamic_kind == PBRD:
        names = ["X", "Y"]
    else:
        names = [f"{p}{k}" for p, size in zip("xy", traj.sizes) for k in range(size)]
    header = ["time"] + names + ["action_i", "action_j", "boundary_id", "dense"]
    rows = []
    for idx, ev in enumerate(traj.events):
        rows.append([repr(float(ev.time))] + [repr(float(v)) for v in ev.state] + [ev.profile[0], ev.profile[-1], ev.boundary or "", 0])
        if dense_per_segment and idx + 1 < len(traj.events):
            nxt = traj.events[idx + 1]
            for k in range(1, dense_per_segment + 1):
                f = k / (dense_per_segment + 1)
                state = traj.state_at(idx, f)
                rows.append(["", *[repr(float(v)) for v in state], ev.profile[0], ev.profile[-1], "", 1])
    return header, rows


def write_trajectory_csv(traj, target, dense_per_segment=0):
    header, rows = trajectory_rows(traj, dense_per_segment)
    own = isinstance(target, (str, bytes)) or hasattr(target, "__fspath__")
    handle = open(target, "w", newline="") if own else target
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if own:
            handle.close()


def trajectory_csv_text(traj, dense_per_segment=0):
    buf = io.StringIO()
    write_trajectory_csv(traj, buf, dense_per_segment)
    return buf.getvalue()
