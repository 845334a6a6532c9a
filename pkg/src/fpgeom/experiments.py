"""Reference-game registry, the random-matrix sampling study, the degenerate
family sweeps and the convergence harness for random games without IIP."""

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import fixtures
from .dynamics import (
    APPROACHES_CONTINUUM,
    CONVERGED_TO_NE,
    LIMIT_CYCLE,
    cfp_integrate,
    classify_limit,
    dfp_run,
    face_first_return,
    write_trajectory_csv,
)
from .errors import ConsistencyError
from .game_core import (
    MIXED,
    PURE,
    SADDLE,
    SINK,
    PayoffBimatrix,
    check_nondegenerate,
    enumerate_equilibria,
    is_quasi_supermodular,
    save_game,
)
from .geometry import IIPClass, classify_iip, indifferent_point
from .poincare import build_return_map, verify_contraction
from .projection import build_projected_square, classify_stability, locate_ne_images

BLOCK = 1000
DEFAULT_SEED = 42


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class FixtureEntry:
    name: str
    game: PayoffBimatrix
    expected: dict
    description: str = ""


@dataclass
class FixtureCheck:
    name: str
    results: list = field(default_factory=list)  # (expectation, ok, detail)

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.results)

    def to_dict(self):
        return {
            "name": self.name,
            "ok": self.ok,
            "results": [{"expectation": k, "ok": ok, "detail": d} for k, ok, d in self.results],
        }


def _rational_canonical_fixture():
    p, q = Fraction(1, 10), Fraction(1, 5)
    Q, R = Fraction(1, 10), Fraction(3, 10)
    xbar = (Fraction(57, 40), Fraction(3, 40), Fraction(-1, 2))
    ybar = (Fraction(39, 40), Fraction(21, 40), Fraction(-1, 2))

    def cross(u, v):
        return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])

    def positive_at(c, vertex):
        return c if c[vertex] > 0 else tuple(-t for t in c)

    # B's reply regions in A's simplex: tie lines through xbar and the chosen
    # edge points, so the projected breakpoints land at p and p+q.
    left = positive_at(cross(xbar, (1 - p, p, 0)), 0)
    right = positive_at(cross(xbar, (1 - p - q, p + q, 0)), 1)
    # A's reply regions in B's simplex, breakpoints at R and Q+R.
    top = positive_at(cross(ybar, (1 - Q - R, Q + R, 0)), 1)
    bottom = positive_at(cross(ybar, (1 - R, R, 0)), 0)
    a = [[0, 0, 0], list(top), list(bottom)]
    b = [[0, left[i], right[i]] for i in range(3)]
    return PayoffBimatrix.from_lists(a, b, "rational", "canonical_mixed_sink")


def build_mixed_sink_fixture():
    """Rational game whose square is already in the canonical mixed-sink
    arrangement with p, q, r = 1/10, 1/5, 7/10; P, Q, R = 3/5, 1/10, 3/10;
    M = m = 1/20."""
    game = _rational_canonical_fixture()
    if classify_iip(game) != IIPClass.WITHOUT_IIP:
        raise ConsistencyError("constructed game has an internal indifferent point")
    eqs = enumerate_equilibria(game)
    if len(eqs) != 1 or eqs[0].kind != MIXED:
        raise ConsistencyError("constructed game does not have a unique mixed equilibrium")
    square = build_projected_square(game)
    analysis = build_return_map(square, "mixed_sink", square.project(eqs[0].x, eqs[0].y))
    want = {"p": 0.1, "q": 0.2, "r": 0.7, "P": 0.6, "Q": 0.1, "R": 0.3, "M": 0.05, "m": 0.05}
    if any(abs(analysis.params[k] - v) > 1e-12 for k, v in want.items()):
        raise ConsistencyError(f"constructed square has parameters {analysis.params}")
    return FixtureEntry(
        "canonical_mixed_sink",
        game,
        {
            "iip": IIPClass.WITHOUT_IIP.value,
            "equilibria": [(eqs[0].x, eqs[0].y)],
            "stability": [SINK],
            "contracts": True,
        },
        "inverse-designed game with a mixed sink at the upper-left corner of Cell V",
    )


# beside the set {((x, 0, 1-x), e1)} on which the endpoint family is drawn
NEAR_EDGE_STARTS = (
    ((0.5, 0.02, 0.48), (0.9, 0.05, 0.05)),
    ((0.8, 0.02, 0.18), (0.9, 0.05, 0.05)),
    ((0.2, 0.02, 0.78), (0.9, 0.05, 0.05)),
)


def fixture_registry():
    third = Fraction(1, 3)
    bary = (third, third, third)
    return [
        FixtureEntry(
            "shapley",
            fixtures.shapley(),
            {
                "iip": IIPClass.WITH_IIP.value,
                "equilibria": [(bary, bary)],
                "limits": {"DFP": LIMIT_CYCLE, "CFP": LIMIT_CYCLE},
                "min_cycle_profiles": 6,
            },
            "cyclic 3x3 game",
        ),
        FixtureEntry(
            "ostrovski",
            fixtures.ostrovski(),
            {"equilibria_approx": [((0.288, 0.370, 0.342), (0.335, 0.327, 0.338), 1e-3)]},
            "float game with one interior equilibrium",
        ),
        FixtureEntry(
            "pure_ne",
            fixtures.pure_ne_game(),
            {
                "iip": IIPClass.WITHOUT_IIP.value,
                "equilibria": [((0, 0, 1), (1, 0, 0))],
                "cfp_random_starts": (7, 20),
                "contracts": True,
            },
            "narrow-region game with a unique pure equilibrium",
        ),
        FixtureEntry(
            "comparison",
            fixtures.comparison_game(),
            {
                "iip": IIPClass.WITHOUT_IIP.value,
                "indifferent_a": (Fraction(5, 6), Fraction(-1, 2), Fraction(2, 3)),
                "indifferent_b": (Fraction(-1, 2), Fraction(5, 6), Fraction(2, 3)),
                "quasi_supermodular": False,
            },
            "without-IIP game outside the quasi-supermodular class",
        ),
        FixtureEntry(
            "continuum_family_k=-2/3",
            fixtures.continuum_family(Fraction(-2, 3)),
            {"degenerate": True, "cfp_limit": APPROACHES_CONTINUUM},
            "degenerate member with a segment of equilibria",
        ),
        FixtureEntry(
            "endpoint_family_k=-2/3",
            fixtures.endpoint_family(Fraction(-2, 3)),
            {
                "degenerate": True,
                "cfp_limit": CONVERGED_TO_NE,
                "cfp_target": ((1, 0, 0), (1, 0, 0)),
                "cfp_starts": NEAR_EDGE_STARTS,
            },
            "degenerate member attracted to one end of its segment",
        ),
        FixtureEntry(
            "four_by_four",
            fixtures.four_by_four_symmetric(),
            {
                "indifferent_b": (Fraction(-5, 2988), Fraction(185, 747), Fraction(1471, 1494), Fraction(-689, 2988)),
                "face_return": ((0.8094, 0.4041), (0.3335, 0.2773), 1e-3),
            },
            "symmetric 4x4 game projected onto a face",
        ),
        build_mixed_sink_fixture(),
    ]


FIXED_STARTS = (
    ((0.2, 0.5, 0.3), (0.3, 0.3, 0.4)),
    ((0.6, 0.1, 0.3), (0.1, 0.6, 0.3)),
)


def _close(u, v, tol):
    return max(abs(float(a) - float(b)) for a, b in zip(u, v)) <= tol


def _exact_equal(u, v):
    return all(Fraction(a) == Fraction(b) for a, b in zip(u, v))


def check_fixture(entry):
    game, exp = entry.game, entry.expected
    out = FixtureCheck(entry.name)
    eqs = None

    def equilibria():
        nonlocal eqs
        if eqs is None:
            eqs = enumerate_equilibria(game)
        return eqs

    if "iip" in exp:
        got = classify_iip(game).value
        out.results.append(("iip", got == exp["iip"], got))
    if "indifferent_a" in exp:
        got = indifferent_point(game, "A").point.weights
        out.results.append(("indifferent_a", _exact_equal(got, exp["indifferent_a"]), [str(v) for v in got]))
    if "indifferent_b" in exp:
        got = indifferent_point(game, "B").point.weights
        out.results.append(("indifferent_b", _exact_equal(got, exp["indifferent_b"]), [str(v) for v in got]))
    if "quasi_supermodular" in exp:
        got = is_quasi_supermodular(game)
        out.results.append(("quasi_supermodular", got == exp["quasi_supermodular"], got))
    if "degenerate" in exp:
        got = not check_nondegenerate(game)[0]
        out.results.append(("degenerate", got == exp["degenerate"], got))
    if "equilibria" in exp:
        got = [(r.x, r.y) for r in equilibria() if r.kind in (PURE, MIXED)]
        ok = len(got) == len(exp["equilibria"]) and all(
            any(_exact_equal(tuple(x) + tuple(y), tuple(ex) + tuple(ey)) for x, y in got) for ex, ey in exp["equilibria"]
        )
        out.results.append(("equilibria", ok, [[str(v) for v in tuple(x) + tuple(y)] for x, y in got]))
    if "equilibria_approx" in exp:
        got = [(r.x, r.y) for r in equilibria() if r.kind in (PURE, MIXED)]
        ok = len(got) == len(exp["equilibria_approx"]) and all(
            any(_close(tuple(x) + tuple(y), tuple(ex) + tuple(ey), tol) for x, y in got)
            for ex, ey, tol in exp["equilibria_approx"]
        )
        out.results.append(("equilibria_approx", ok, [[round(float(v), 4) for v in tuple(x) + tuple(y)] for x, y in got]))
    if "limits" in exp:
        start = FIXED_STARTS[0]
        for kind, want in exp["limits"].items():
            traj = dfp_run(game, (1, 0, 0), (0, 1, 0), 20000) if kind == "DFP" else cfp_integrate(game, *start, extrapolate=False, max_events=3000)
            cls = classify_limit(traj, equilibria())
            count = len(set(cls.period or ()))
            ok = cls.tag == want and count >= exp.get("min_cycle_profiles", 0)
            out.results.append((f"limit_{kind}", ok, {"tag": cls.tag, "cycle_profiles": count}))
    if "cfp_limit" in exp:
        for start in exp.get("cfp_starts", FIXED_STARTS):
            cls = classify_limit(cfp_integrate(game, *start), equilibria())
            ok = cls.tag == exp["cfp_limit"]
            if ok and "cfp_target" in exp:
                ok = _close(cls.point, tuple(exp["cfp_target"][0]) + tuple(exp["cfp_target"][1]), 1e-6)
            out.results.append(("cfp_limit", ok, cls.tag))
    if "cfp_random_starts" in exp:
        seed, count = exp["cfp_random_starts"]
        tags = [classify_limit(cfp_integrate(game, x, y), equilibria()).tag for x, y in random_starts(seed, count, 3)]
        hits = sum(t == CONVERGED_TO_NE for t in tags)
        out.results.append(("cfp_random_starts", hits == count, f"{hits}/{count}"))
    if "stability" in exp:
        got = [classify_stability(game, r).stability for r in equilibria() if r.kind == MIXED]
        out.results.append(("stability", got == exp["stability"], got))
    if "contracts" in exp:
        cert = verify_contraction(build_return_map(build_projected_square(game)))
        out.results.append(("contracts", cert.ok == exp["contracts"], cert.sup_derivative))
    if "face_return" in exp:
        start, want, tol = exp["face_return"]
        res = face_first_return(game, start)
        got = res["return_point"]
        ok = got is not None and _close(got, want, tol)
        out.results.append(("face_return_point", ok, None if got is None else [round(v, 5) for v in got]))
        farther = got is not None and res["return_distance"] > res["start_distance"]
        out.results.append(("face_return_farther", farther, [res["start_distance"], res["return_distance"]]))
    return out


def random_starts(seed, count, size=3):
    """Uniform points on the simplex pair, one independent stream per start."""
    out = []
    for child in np.random.SeedSequence(seed).spawn(count):
        rng = np.random.Generator(np.random.PCG64(child))
        x = rng.dirichlet(np.ones(size))
        y = rng.dirichlet(np.ones(size))
        out.append((tuple(float(v) for v in x), tuple(float(v) for v in y)))
    return out


# ---------------------------------------------------------------------------
# sampling study


@dataclass(frozen=True)
class SamplingReport:
    dimension: int
    trials: int
    seed: int
    count_without_iip: int
    singular: int
    wall_time: float = field(default=0.0, compare=False)

    @property
    def proportion(self):
        return self.count_without_iip / self.trials

    def to_dict(self, timing=False):
        out = {
            "schema": 1,
            "dimension": self.dimension,
            "trials": self.trials,
            "seed": self.seed,
            "count_without_iip": self.count_without_iip,
            "singular": self.singular,
            "proportion": self.proportion,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


def indifferent_weights_batch(a):
    """Indifferent points of a stack of square payoff matrices, shape (k, n)."""
    n = a.shape[-1]
    tilde = np.concatenate([a[:, :, : n - 1] - a[:, :, n - 1 :], -np.ones(a.shape[:2] + (1,))], axis=2)
    rhs = -a[:, :, n - 1]
    sol = np.linalg.solve(tilde, rhs[..., None])[..., 0]
    head = sol[:, : n - 1]
    return np.concatenate([head, 1 - head.sum(axis=1, keepdims=True)], axis=1)


def _sampling_block(args):
    dimension, seed, block_index, count = args
    child = np.random.SeedSequence(seed, spawn_key=(dimension, block_index))
    rng = np.random.Generator(np.random.PCG64(child))
    a = rng.random((count, dimension, dimension))
    outside = singular = 0
    try:
        w = indifferent_weights_batch(a)
        outside = int(np.any(w < 0, axis=1).sum())
    except np.linalg.LinAlgError:
        for mat in a:
            try:
                w = indifferent_weights_batch(mat[None])
            except np.linalg.LinAlgError:
                singular += 1  # no indifferent point at all, so none inside
                outside += 1
                continue
            outside += int(np.any(w < 0))
    return outside, singular


def _map(fn, items, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def run_sampling_study(dimension, trials, seed=DEFAULT_SEED, jobs=1):
    """Share of uniform [0,1) matrices whose indifferent point lies outside
    the opponent's simplex. Blocks of trials draw from independent PCG64
    streams keyed by (dimension, block), so ``jobs`` never changes the result."""
    if dimension not in (3, 4, 5, 6):
        raise ValueError("dimension must be 3, 4, 5 or 6")
    if trials < 1:
        raise ValueError("trials must be positive")
    began = time.perf_counter()
    blocks = [(dimension, seed, k, min(BLOCK, trials - k * BLOCK)) for k in range(math.ceil(trials / BLOCK))]
    parts = _map(_sampling_block, blocks, jobs)
    outside = sum(p[0] for p in parts)
    singular = sum(p[1] for p in parts)
    return SamplingReport(dimension, trials, seed, outside, singular, time.perf_counter() - began)


# ---------------------------------------------------------------------------
# parameter sweeps

FAMILIES = {"example5": fixtures.continuum_family, "example6": fixtures.endpoint_family}


def default_k_grid():
    """97 exact points on [-3/2, 1/2]; -2/3 is the 41st."""
    return [Fraction(-3, 2) + Fraction(i, 48) for i in range(97)]


def ne_signature(eqs):
    return tuple(sorted((r.kind, tuple(r.support_a), tuple(r.support_b)) for r in eqs))


@dataclass(frozen=True)
class SweepPoint:
    k: Fraction
    iip: str
    degenerate: bool
    signature: tuple
    limits: tuple

    def to_dict(self):
        return {
            "k": str(self.k),
            "iip": self.iip,
            "degenerate": self.degenerate,
            "equilibria": [{"kind": k, "support_a": list(a), "support_b": list(b)} for k, a, b in self.signature],
            "limits": list(self.limits),
        }


@dataclass(frozen=True)
class ShiftPoint:
    low: Fraction
    high: Fraction
    before: tuple
    after: tuple

    @property
    def estimate(self):
        return (self.low + self.high) / 2

    def to_dict(self):
        return {"estimate": float(self.estimate), "low": str(self.low), "high": str(self.high)}


@dataclass(frozen=True)
class SweepReport:
    family: str
    points: tuple
    shifts: tuple

    def shift_near(self, k, tol):
        return [s for s in self.shifts if abs(float(s.estimate) - float(k)) <= tol]

    def to_dict(self):
        return {
            "schema": 1,
            "family": self.family,
            "points": [p.to_dict() for p in self.points],
            "shifts": [s.to_dict() for s in self.shifts],
        }


def _signature_at(family, k):
    return ne_signature(enumerate_equilibria(family(k)))


def _bisect(family, lo, hi, sig_lo, width):
    while hi - lo > width:
        mid = (lo + hi) / 2
        if _signature_at(family, mid) == sig_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def run_parameter_sweep(family, k_grid=None, simulate=True, width=Fraction(1, 10**4), starts=FIXED_STARTS):
    """Equilibrium structure and CFP limits across a one-parameter family,
    with every change of structure bracketed to ``width``."""
    make = FAMILIES[family] if isinstance(family, str) else family
    name = family if isinstance(family, str) else getattr(family, "__name__", "family")
    grid = [Fraction(k) for k in (k_grid or default_k_grid())]
    points = []
    for k in grid:
        game = make(k)
        eqs = enumerate_equilibria(game)
        limits = ()
        if simulate:
            limits = tuple(classify_limit(cfp_integrate(game, x, y), eqs).tag for x, y in starts)
        points.append(SweepPoint(k, classify_iip(game).value, not check_nondegenerate(game)[0], ne_signature(eqs), limits))
    shifts = []
    i = 0
    while i < len(points) - 1:
        left, right = points[i], points[i + 1]
        if left.signature != right.signature:
            nxt = points[i + 2] if i + 2 < len(points) else None
            if nxt is not None and nxt.signature == left.signature:
                # structure differs at a single grid point only
                shifts.append(ShiftPoint(right.k, right.k, left.signature, right.signature))
                i += 2
                continue
            lo, hi = _bisect(make, left.k, right.k, left.signature, Fraction(width))
            shifts.append(ShiftPoint(lo, hi, left.signature, right.signature))
        i += 1
    merged = []
    for s in shifts:
        if merged and s.low - merged[-1].high <= Fraction(width):
            prev = merged.pop()
            s = ShiftPoint(prev.low, s.high, prev.before, s.after)
        merged.append(s)
    return SweepReport(name, tuple(points), tuple(merged))


# ---------------------------------------------------------------------------
# convergence harness


@dataclass(frozen=True)
class GameOutcome:
    index: int
    game: PayoffBimatrix
    equilibria: tuple
    tags: tuple
    tail_counts: tuple
    stabilities: tuple
    images_ok: bool
    failure: str = None


def _sample_game(rng):
    while True:
        a = rng.random((3, 3))
        b = rng.random((3, 3))
        game = PayoffBimatrix.from_lists(a.tolist(), b.tolist(), "float", "random")
        if classify_iip(game) == IIPClass.WITHOUT_IIP and check_nondegenerate(game)[0]:
            return game


def _stability_of(game, rec):
    if rec.kind == PURE:
        return PURE
    return classify_stability(game, rec).stability


def _run_one(args):
    seed, index, start_per_game = args
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    game = _sample_game(rng)
    eqs = tuple(enumerate_equilibria(game))
    tags, counts, failure = [], [], None
    trajectories = []
    for _ in range(start_per_game):
        x = tuple(float(v) for v in rng.dirichlet(np.ones(3)))
        y = tuple(float(v) for v in rng.dirichlet(np.ones(3)))
        traj = cfp_integrate(game, x, y)
        cls = classify_limit(traj, eqs)
        tags.append(cls.tag)
        counts.append(cls.evidence.get("tail_profile_count"))
        trajectories.append(traj)
        if cls.tag != CONVERGED_TO_NE and failure is None:
            failure = f"CFP from {x}, {y} ended {cls.tag}"
    stabilities = tuple(_stability_of(game, r) for r in eqs if r.kind in (PURE, MIXED))
    try:
        locate_ne_images(build_projected_square(game), eqs)
        images_ok = True
    except Exception as exc:  # noqa: BLE001 - recorded as a failure
        images_ok = False
        failure = failure or f"equilibrium image check failed: {exc}"
    outcome = GameOutcome(index, game, eqs, tuple(tags), tuple(counts), stabilities, images_ok, failure)
    return outcome, (trajectories if failure else None)


@dataclass(frozen=True)
class TheoremReport:
    trials: int
    seed: int
    start_per_game: int
    failures: tuple
    multi_ne_games: int
    saddle_sink_violations: tuple
    tail_count_violations: tuple
    image_violations: tuple
    artifacts: tuple

    @property
    def ok(self):
        return not (self.failures or self.saddle_sink_violations or self.tail_count_violations or self.image_violations)

    def to_dict(self):
        return {
            "schema": 1,
            "trials": self.trials,
            "seed": self.seed,
            "start_per_game": self.start_per_game,
            "ok": self.ok,
            "failures": list(self.failures),
            "multi_ne_games": self.multi_ne_games,
            "saddle_sink_violations": list(self.saddle_sink_violations),
            "tail_count_violations": list(self.tail_count_violations),
            "image_violations": list(self.image_violations),
            "artifacts": list(self.artifacts),
        }


def _dump_counterexample(directory, outcome, trajectories):
    path = os.path.join(directory, f"counterexample_{outcome.index:05d}")
    os.makedirs(path, exist_ok=True)
    save_game(outcome.game, os.path.join(path, "game.json"))
    for k, traj in enumerate(trajectories or ()):
        write_trajectory_csv(traj, os.path.join(path, f"trajectory_{k}.csv"))
    with open(os.path.join(path, "outcome.json"), "w") as fh:
        json.dump({"index": outcome.index, "tags": list(outcome.tags), "failure": outcome.failure}, fh, indent=2)
    return path


def verify_main_theorem(trials, seed=DEFAULT_SEED, start_per_game=3, jobs=1, artifact_dir=None):
    """Sample nondegenerate 3x3 games without IIP and check that CFP converges
    to an equilibrium from every start, that games with several equilibria
    have both a saddle and a stable one, that mixed equilibria map to Cell V
    corners and that converged tails use 1, 2 or 4 action profiles."""
    if trials < 1:
        raise ValueError("trials must be positive")
    results = _map(_run_one, [(seed, i, start_per_game) for i in range(trials)], jobs)
    failures, saddle_sink, tails, images, artifacts = [], [], [], [], []
    multi = 0
    for outcome, trajectories in results:
        if outcome.failure:
            failures.append({"index": outcome.index, "reason": outcome.failure})
            if artifact_dir:
                artifacts.append(_dump_counterexample(artifact_dir, outcome, trajectories))
        if not outcome.images_ok:
            images.append(outcome.index)
        if len(outcome.stabilities) >= 2:
            multi += 1
            stable = any(s in (SINK, PURE) for s in outcome.stabilities)
            if SADDLE not in outcome.stabilities or not stable:
                saddle_sink.append({"index": outcome.index, "stabilities": list(outcome.stabilities)})
        for tag, count in zip(outcome.tags, outcome.tail_counts):
            if tag == CONVERGED_TO_NE and count not in (1, 2, 4):
                tails.append({"index": outcome.index, "count": count})
    return TheoremReport(trials, seed, start_per_game, tuple(failures), multi, tuple(saddle_sink), tuple(tails), tuple(images), tuple(artifacts))


def sample_without_iip_game(seed, index=0):
    """The game ``verify_main_theorem`` would draw for trial ``index``."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))
    return _sample_game(rng)


__all__ = [
    "FixtureEntry",
    "FixtureCheck",
    "SamplingReport",
    "SweepReport",
    "ShiftPoint",
    "SweepPoint",
    "TheoremReport",
    "build_mixed_sink_fixture",
    "check_fixture",
    "default_k_grid",
    "fixture_registry",
    "random_starts",
    "run_parameter_sweep",
    "run_sampling_study",
    "verify_main_theorem",
]
