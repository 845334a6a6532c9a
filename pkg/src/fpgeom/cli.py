"""Command-line front end: ``fpgeom <subcommand> ...``.

Exit codes: 0 success, 2 usage error (click), 3 unreadable game file,
4 an expectation did not hold, 5 unsupported configuration.
"""

import json
import sys
from collections import Counter
from enum import Enum
from fractions import Fraction

import click

from . import dynamics, experiments
from .errors import ConsistencyError, GameInputError, UnsupportedConfiguration
from .game_core import MIXED, check_nondegenerate, enumerate_equilibria, is_quasi_supermodular, is_supermodular, load_game
from .geometry import IIPClass, classify_iip, configuration_pattern, indifferent_point
from .poincare import build_return_map, simulate_first_return, verify_contraction
from .projection import build_projected_square, classify_stability, locate_ne_images

EXIT_PARSE = 3
EXIT_EXPECTATION = 4
EXIT_UNSUPPORTED = 5
SCHEMA = 1


def _jsonable(value):
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (tuple, set)):
        return list(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if hasattr(value, "item"):
        return value.item()
    raise TypeError(f"cannot serialise {type(value).__name__}")


def _emit(payload):
    click.echo(json.dumps({"schema": SCHEMA, **payload}, default=_jsonable, indent=2))


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load(path):
    try:
        return load_game(path)
    except GameInputError as exc:
        _fail(EXIT_PARSE, f"{path}: {exc}")
    except OSError as exc:
        _fail(EXIT_PARSE, f"{path}: {exc.strerror}")


def _vector(text, size=None):
    try:
        values = tuple(float(Fraction(v.strip())) for v in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter(f"expected comma-separated numbers, got {text!r}") from None
    if size is not None and len(values) != size:
        raise click.BadParameter(f"expected {size} numbers, got {len(values)}")
    return values


@click.group()
@click.version_option(package_name="fpgeom")
def main():
    """Geometric analysis and fictitious-play simulation for small bimatrix games."""


# ---------------------------------------------------------------------------


def _analysis(game):
    out = {"game": game.to_dict()}
    iip = classify_iip(game)
    out["iip_class"] = iip.value
    points = {}
    for player in ("A", "B"):
        try:
            res = indifferent_point(game, player)
            points[player] = {
                "status": res.status,
                "internal": res.is_internal,
                "weights": None if res.point is None else list(res.point.weights),
            }
        except UnsupportedConfiguration as exc:
            points[player] = {"status": "unavailable", "reason": str(exc)}
    out["indifferent_points"] = points
    nondeg, witnesses = check_nondegenerate(game)
    out["nondegenerate"] = nondeg
    eqs = enumerate_equilibria(game)
    projectable = iip == IIPClass.WITHOUT_IIP and game.n == 3 and game.m == 3
    records = []
    for rec in eqs:
        item = rec.to_dict()
        if rec.kind == MIXED:
            if projectable and len(rec.support_a) == 2 and len(rec.support_b) == 2:
                item["stability"] = classify_stability(game, rec).stability
            else:
                item["stability"] = "unavailable"
        records.append(item)
    out["equilibria"] = records
    out["quasi_supermodular"] = is_quasi_supermodular(game)
    out["supermodular"] = is_supermodular(game)
    if game.n == 3 and game.m == 3 and iip == IIPClass.WITHOUT_IIP:
        out["configuration_pattern"] = {p: configuration_pattern(game, p) for p in ("A", "B")}
    else:
        out["configuration_pattern"] = "unavailable"
    return out


@main.command()
@click.argument("game_file", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Print the full report as JSON.")
def analyze(game_file, as_json):
    """Indifferent points, IIP class, equilibria and stability of GAME_FILE."""
    game = _load(game_file)
    report = _analysis(game)
    if as_json:
        _emit(report)
        return
    click.echo(f"game: {game.name or game_file} ({game.n}x{game.m}, {game.entry_kind})")
    click.echo(f"IIP class: {report['iip_class']}")
    for player, info in report["indifferent_points"].items():
        weights = info.get("weights")
        shown = "none" if weights is None else ", ".join(_jsonable(Fraction(w)) if game.exact else f"{w:.6g}" for w in weights)
        click.echo(f"indifferent point of {player}: {info['status']} ({shown}) internal={info.get('internal')}")
    click.echo(f"nondegenerate: {report['nondegenerate']}")
    click.echo(f"equilibria: {len(report['equilibria'])}")
    for rec in report["equilibria"]:
        click.echo(f"  {rec['kind']}: x=({', '.join(rec['x'])}) y=({', '.join(rec['y'])}) stability={rec['stability']}")
    click.echo(f"quasi-supermodular: {report['quasi_supermodular']}")
    click.echo(f"configuration pattern: {report['configuration_pattern']}")


# ---------------------------------------------------------------------------

KINDS = ("dfp", "cfp", "brd", "pbrd", "sym-brd")


def _run_kind(kind, game, x, y, steps, horizon, max_events, square):
    if kind == "dfp":
        return dynamics.dfp_run(game, x, y, steps)
    if kind == "cfp":
        return dynamics.cfp_integrate(game, x, y, horizon=horizon, max_events=max_events)
    if kind == "brd":
        return dynamics.brd_integrate(game, x, y, horizon=horizon, max_events=max_events)
    point = square.project(x, y)
    return dynamics.pbrd_integrate(square, tuple(float(v) for v in point), max_events=max_events, horizon=horizon)


@main.command()
@click.argument("game_file", type=click.Path(dir_okay=False))
@click.option("--kind", type=click.Choice(KINDS), required=True, help="Dynamic to run.")
@click.option("--x", "x_text", help="Start for A, e.g. 0.2,0.5,0.3 (default: uniform).")
@click.option("--y", "y_text", help="Start for B (default: uniform).")
@click.option("--random", "random_spec", help="SEED:COUNT seeded random starts.")
@click.option("--start-face", help="Chart point a,b on the face (sym-brd only).")
@click.option("--steps", type=int, default=10000, show_default=True, help="DFP iterations.")
@click.option("--horizon", type=float, default=None, help="Stop once the clock passes this time.")
@click.option("--max-events", type=int, default=dynamics.DEFAULT_MAX_EVENTS, show_default=True)
@click.option("--epsilon", type=float, default=1e-6, show_default=True, help="Convergence tolerance.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write the (first) trajectory here.")
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), help="Write an SVG sketch of the (first) trajectory.")
@click.option("--expect", help="Fail with exit code 4 unless every run ends with this tag.")
@click.option("--json", "as_json", is_flag=True)
def simulate(game_file, kind, x_text, y_text, random_spec, start_face, steps, horizon, max_events, epsilon, csv_path, svg_path, expect, as_json):
    """Run a dynamic on GAME_FILE and classify where it goes."""
    game = _load(game_file)
    if kind == "sym-brd":
        _simulate_face(game, start_face, csv_path, as_json)
        return
    square = None
    if kind == "pbrd":
        try:
            square = build_projected_square(game)
        except UnsupportedConfiguration as exc:
            _fail(EXIT_UNSUPPORTED, f"projected dynamics need a 3x3 game without IIP: {exc}")
    if random_spec:
        try:
            seed, count = (int(v) for v in random_spec.split(":"))
        except ValueError:
            raise click.BadParameter("expected SEED:COUNT", param_hint="--random") from None
        starts = experiments.random_starts(seed, count, game.n) if game.n == game.m else None
        if starts is None:
            _fail(EXIT_UNSUPPORTED, "random starts need a square game")
    else:
        x = _vector(x_text, game.n) if x_text else tuple(1.0 / game.n for _ in range(game.n))
        y = _vector(y_text, game.m) if y_text else tuple(1.0 / game.m for _ in range(game.m))
        starts = [(x, y)]
    eqs = enumerate_equilibria(game)
    runs = []
    for k, (x, y) in enumerate(starts):
        traj = _run_kind(kind, game, x, y, steps, horizon, max_events, square)
        if kind == "pbrd":
            cls = None
            tag = traj.terminal
        else:
            cls = dynamics.classify_limit(traj, eqs, epsilon_conv=epsilon)
            tag = cls.tag
        runs.append({"start": [list(x), list(y)], "tag": tag, "events": len(traj.events), "terminal": traj.terminal, "limit": cls})
        if k == 0:
            if csv_path:
                dynamics.write_trajectory_csv(traj, csv_path)
            if svg_path:
                from .svg import trajectory_svg

                with open(svg_path, "w") as fh:
                    fh.write(trajectory_svg(traj, square.as_float() if square is not None else None))
    counts = Counter(r["tag"] for r in runs)
    if as_json:
        _emit({"kind": kind, "runs": runs, "summary": dict(counts)})
    elif len(runs) == 1:
        r = runs[0]
        click.echo(f"{kind}: {r['tag']} after {r['events']} events (terminal {r['terminal']})")
        if r["limit"] is not None and r["limit"].period:
            click.echo(f"cycle profiles: {len(set(r['limit'].period))}")
        if r["limit"] is not None and r["limit"].point is not None:
            click.echo("limit point: " + ", ".join(f"{v:.6g}" for v in r["limit"].point))
    else:
        for tag, n in sorted(counts.items()):
            click.echo(f"{tag}: {n}/{len(runs)}")
    if expect and counts.get(expect, 0) != len(runs):
        _fail(EXIT_EXPECTATION, f"expected {expect} for every run, got {dict(counts)}")


def _simulate_face(game, start_face, csv_path, as_json):
    if not start_face:
        raise click.BadParameter("sym-brd needs --start-face a,b", param_hint="--start-face")
    chart = _vector(start_face, 2)
    try:
        res = dynamics.face_first_return(game, chart)
    except UnsupportedConfiguration as exc:
        _fail(EXIT_UNSUPPORTED, str(exc))
    if csv_path:
        dynamics.write_trajectory_csv(res["trajectory"], csv_path)
    payload = {
        "start": list(res["start"]),
        "return_point": None if res["return_point"] is None else list(res["return_point"]),
        "reply_pattern": res["pattern"],
        "start_distance": res["start_distance"],
        "return_distance": res["return_distance"],
    }
    if as_json:
        _emit(payload)
        return
    if res["return_point"] is None:
        click.echo("no return to the section")
        return
    click.echo("return point: " + ", ".join(f"{v:.4f}" for v in res["return_point"]))
    click.echo(f"distance to region: start {res['start_distance']:.6g}, return {res['return_distance']:.6g}")


# ---------------------------------------------------------------------------


@main.command()
@click.argument("game_file", type=click.Path(dir_okay=False))
def project(game_file):
    """Projected nine-cell square of a 3x3 game without IIP, as JSON."""
    game = _load(game_file)
    try:
        square = build_projected_square(game)
        eqs = enumerate_equilibria(game)
        images = locate_ne_images(square, eqs)
    except UnsupportedConfiguration as exc:
        _fail(EXIT_UNSUPPORTED, str(exc))
    except ConsistencyError as exc:
        _fail(EXIT_EXPECTATION, str(exc))
    _emit(
        {
            "square": square.to_dict(),
            "equilibrium_images": [{"equilibrium": rec, "image": [float(v) for v in point]} for rec, point in images],
        }
    )


@main.command()
@click.argument("game_file", type=click.Path(dir_okay=False))
@click.option("--kind", "config_kind", type=click.Choice(["mixed_sink", "pure"]), default=None)
@click.option("--samples", type=int, default=200, show_default=True)
@click.option("--check", "check_points", type=int, default=0, help="Compare with simulated returns at this many section points.")
def poincare(game_file, config_kind, samples, check_points):
    """Return-map report (stage maps, thresholds, contraction) as JSON."""
    game = _load(game_file)
    try:
        square = build_projected_square(game)
        analysis = build_return_map(square, config_kind)
    except UnsupportedConfiguration as exc:
        _fail(EXIT_UNSUPPORTED, str(exc))
    cert = verify_contraction(analysis, samples)
    report = {**analysis.to_dict(), "contraction": cert.to_dict()}
    worst = 0.0
    if check_points:
        lo, hi = analysis.d_C, analysis.section_length
        rows = []
        for k in range(1, check_points + 1):
            d0 = lo + (hi - lo) * k / check_points
            analytic, kind = analysis.evaluate(d0)
            simulated, path = simulate_first_return(analysis, d0)
            gap = abs(analytic - simulated) if simulated is not None else float("inf")
            worst = max(worst, gap)
            rows.append({"d0": d0, "analytic": analytic, "simulated": simulated, "path_kind": kind, "cells": path})
        report["oracle"] = {"points": rows, "max_gap": worst}
    _emit(report)
    if not cert.ok or worst > 1e-9:
        sys.exit(EXIT_EXPECTATION)


# ---------------------------------------------------------------------------


@main.command()
@click.option("--dim", "dims", type=click.IntRange(3, 6), multiple=True, default=(3,), show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--seed", type=int, default=experiments.DEFAULT_SEED, show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--expect-above", type=float, default=None, help="Exit 4 unless every proportion exceeds this.")
def sample(dims, trials, seed, jobs, expect_above):
    """Share of random matrices whose indifferent point is outside the simplex."""
    reports = [experiments.run_sampling_study(d, trials, seed, jobs) for d in dims]
    _emit({"reports": [r.to_dict() for r in reports]})
    if expect_above is not None and not all(r.proportion > expect_above for r in reports):
        sys.exit(EXIT_EXPECTATION)


def _grid(text):
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = Fraction(lo), Fraction(hi), int(count)
    except (ValueError, ZeroDivisionError):
        raise click.BadParameter("expected LOW:HIGH:COUNT", param_hint="--grid") from None
    if count < 2:
        raise click.BadParameter("COUNT must be at least 2", param_hint="--grid")
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


@main.command()
@click.option("--family", type=click.Choice(sorted(experiments.FAMILIES)), required=True)
@click.option("--grid", "grid_text", default=None, help="LOW:HIGH:COUNT (default -3/2:1/2:97).")
@click.option("--no-simulate", is_flag=True, help="Skip the CFP runs.")
@click.option("--expect-shift", type=str, default=None, help="Exit 4 unless a shift lies within 1e-4 of this k.")
def sweep(family, grid_text, no_simulate, expect_shift):
    """Equilibrium structure and CFP limits across a one-parameter family."""
    grid = _grid(grid_text) if grid_text else None
    report = experiments.run_parameter_sweep(family, grid, simulate=not no_simulate)
    _emit(report.to_dict())
    if expect_shift is not None and not report.shift_near(Fraction(expect_shift), 1e-4):
        sys.exit(EXIT_EXPECTATION)


@main.command()
@click.argument("action", type=click.Choice(["list", "run", "theorem"]))
@click.argument("names", nargs=-1)
@click.option("--trials", type=click.IntRange(min=1), default=1000, show_default=True, help="theorem: games to sample.")
@click.option("--starts", type=click.IntRange(min=1), default=3, show_default=True, help="theorem: CFP starts per game.")
@click.option("--seed", type=int, default=experiments.DEFAULT_SEED, show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--artifacts", type=click.Path(file_okay=False), default=None, help="theorem: directory for counterexamples.")
def examples(action, names, trials, starts, seed, jobs, artifacts):
    """List or check the reference games, or run the random-game convergence harness."""
    if action == "theorem":
        report = experiments.verify_main_theorem(trials, seed, starts, jobs, artifacts)
        _emit(report.to_dict())
        if not report.ok:
            sys.exit(EXIT_EXPECTATION)
        return
    registry = experiments.fixture_registry()
    if names:
        unknown = set(names) - {e.name for e in registry}
        if unknown:
            raise click.BadParameter(f"unknown fixture(s): {', '.join(sorted(unknown))}")
        registry = [e for e in registry if e.name in names]
    if action == "list":
        for entry in registry:
            click.echo(f"{entry.name}: {entry.description}")
        return
    failed = []
    for entry in registry:
        check = experiments.check_fixture(entry)
        for key, ok, detail in check.results:
            click.echo(f"{'PASS' if ok else 'FAIL'} {entry.name} {key}: {json.dumps(detail, default=_jsonable)}")
        if not check.ok:
            failed.append(entry.name)
    if failed:
        _fail(EXIT_EXPECTATION, "expectations failed for " + ", ".join(failed))


if __name__ == "__main__":
    main()
