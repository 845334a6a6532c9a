import json
import os
from fractions import Fraction

import numpy as np
import pytest

from fpgeom import experiments, fixtures
from fpgeom.dynamics import APPROACHES_CONTINUUM, CONVERGED_TO_NE
from fpgeom.experiments import (
    SamplingReport,
    build_mixed_sink_fixture,
    check_fixture,
    default_k_grid,
    fixture_registry,
    indifferent_weights_batch,
    random_starts,
    run_parameter_sweep,
    run_sampling_study,
    sample_without_iip_game,
    verify_main_theorem,
)
from fpgeom.game_core import MIXED, PayoffBimatrix, enumerate_equilibria
from fpgeom.geometry import IIPClass, classify_iip, indifferent_point

MINUS_TWO_THIRDS = Fraction(-2, 3)


def test_batched_weights_match_exact_indifferent_points():
    rng = np.random.Generator(np.random.PCG64(12))
    mats = rng.random((25, 3, 3))
    batch = indifferent_weights_batch(mats)
    for mat, w in zip(mats, batch):
        game = PayoffBimatrix.from_lists(mat.tolist(), mat.T.tolist(), "float")
        exact = indifferent_point(game, "A").point
        assert [float(v) for v in exact] == pytest.approx(list(w), abs=1e-9)


def test_batched_weights_equalise_payoffs():
    rng = np.random.Generator(np.random.PCG64(13))
    for n in (3, 4, 5, 6):
        mats = rng.random((50, n, n))
        w = indifferent_weights_batch(mats)
        pay = np.einsum("kij,kj->ki", mats, w)
        assert np.allclose(pay, pay[:, :1], atol=1e-9)
        assert np.allclose(w.sum(axis=1), 1)


def test_sampling_is_deterministic_and_independent_of_jobs():
    one = run_sampling_study(3, 5000, seed=7)
    again = run_sampling_study(3, 5000, seed=7)
    split = run_sampling_study(3, 5000, seed=7, jobs=2)
    assert one == again == split
    assert run_sampling_study(3, 5000, seed=8) != one


def test_sampling_counts_agree_with_exact_classifier():
    report = run_sampling_study(3, 300, seed=3)
    child = np.random.SeedSequence(3, spawn_key=(3, 0))
    mats = np.random.Generator(np.random.PCG64(child)).random((300, 3, 3))
    outside = 0
    for mat in mats:
        game = PayoffBimatrix.from_lists(mat.tolist(), mat.T.tolist(), "float")
        outside += not indifferent_point(game, "A").is_internal
    assert report.count_without_iip == outside


def test_sampling_proportions_grow_with_dimension():
    props = [run_sampling_study(n, 20_000, seed=42).proportion for n in (3, 4, 5, 6)]
    assert all(b > a for a, b in zip(props, props[1:]))
    assert props[0] == pytest.approx(0.75, abs=0.01)


def test_sampling_rejects_bad_arguments():
    with pytest.raises(ValueError):
        run_sampling_study(7, 10)
    with pytest.raises(ValueError):
        run_sampling_study(3, 0)


def test_sampling_report_serialises_without_timing():
    data = run_sampling_study(4, 100, seed=1).to_dict()
    assert data["schema"] == 1 and "wall_time" not in data
    assert isinstance(SamplingReport(3, 10, 0, 7, 0).proportion, float)


def test_k_grid_contains_the_shift_exactly():
    grid = default_k_grid()
    assert len(grid) == 97
    assert grid[40] == MINUS_TWO_THIRDS
    assert grid[0] == Fraction(-3, 2) and grid[-1] == Fraction(1, 2)


@pytest.mark.parametrize("family", ["example5", "example6"])
def test_structural_shift_located_at_minus_two_thirds(family):
    report = run_parameter_sweep(family, simulate=False)
    near = report.shift_near(-2 / 3, 1e-4)
    assert len(near) == 1
    assert near[0].low <= MINUS_TWO_THIRDS <= near[0].high
    assert abs(near[0].estimate - MINUS_TWO_THIRDS) <= Fraction(1, 10**4)


def test_continuum_family_also_shifts_at_minus_one_half():
    report = run_parameter_sweep("example5", simulate=False)
    assert report.shift_near(-0.5, 1e-4)


@pytest.mark.parametrize("family", ["example5", "example6"])
def test_equilibrium_count_is_locally_constant_away_from_minus_two_thirds(family):
    report = run_parameter_sweep(family, simulate=False)
    jumps = [
        (str(a.k), str(b.k))
        for a, b in zip(report.points, report.points[1:])
        if len(a.signature) != len(b.signature) and MINUS_TWO_THIRDS not in (a.k, b.k)
    ]
    assert jumps == []


def test_sweep_limits_at_the_shift():
    grid = [Fraction(-3, 4), MINUS_TWO_THIRDS, Fraction(-7, 12)]
    five = run_parameter_sweep("example5", k_grid=grid)
    assert set(five.points[1].limits) == {APPROACHES_CONTINUUM}
    six = run_parameter_sweep("example6", k_grid=grid)
    assert all(tag == CONVERGED_TO_NE for tag in six.points[1].limits)
    data = six.to_dict()
    assert data["schema"] == 1 and data["points"][1]["k"] == "-2/3"


def test_random_starts_are_reproducible_simplex_points():
    starts = random_starts(5, 10)
    assert starts == random_starts(5, 10)
    for x, y in starts:
        assert sum(x) == pytest.approx(1) and sum(y) == pytest.approx(1)
        assert min(x) >= 0 and min(y) >= 0


def test_sampled_games_are_without_iip():
    for index in range(5):
        game = sample_without_iip_game(9, index)
        assert classify_iip(game) == IIPClass.WITHOUT_IIP


def test_small_theorem_run_is_clean():
    report = verify_main_theorem(30, seed=5)
    assert report.ok, report.to_dict()
    assert report.multi_ne_games > 0
    assert verify_main_theorem(30, seed=5, jobs=2).to_dict() == report.to_dict()


def test_failing_runs_leave_artifacts(tmp_path, monkeypatch):
    real = experiments.cfp_integrate
    monkeypatch.setattr(experiments, "cfp_integrate", lambda g, x, y: real(g, x, y, max_events=3, extrapolate=False))
    monkeypatch.setattr(experiments, "classify_limit", lambda traj, eqs: _undetermined())
    report = verify_main_theorem(2, seed=5, start_per_game=1, artifact_dir=str(tmp_path))
    assert not report.ok
    assert report.artifacts
    folder = report.artifacts[0]
    assert os.path.exists(os.path.join(folder, "game.json"))
    assert os.path.exists(os.path.join(folder, "trajectory_0.csv"))
    with open(os.path.join(folder, "outcome.json")) as fh:
        assert json.load(fh)["failure"]


def _undetermined():
    from fpgeom.dynamics import UNDETERMINED, LimitClassification

    return LimitClassification(UNDETERMINED)


def test_canonical_fixture_has_the_designed_equilibrium():
    entry = build_mixed_sink_fixture()
    eqs = enumerate_equilibria(entry.game)
    assert len(eqs) == 1 and eqs[0].kind == MIXED
    assert eqs[0].x == (Fraction(9, 10), Fraction(1, 10), Fraction(0))
    assert eqs[0].y == (Fraction(3, 5), Fraction(2, 5), Fraction(0))


def test_registry_covers_the_reference_games():
    names = {e.name for e in fixture_registry()}
    for expected in ("shapley", "ostrovski", "pure_ne", "comparison", "four_by_four"):
        assert expected in names


@pytest.mark.parametrize("name", ["shapley", "pure_ne", "comparison", "continuum_family_k=-2/3"])
def test_registry_entries_check_out(name):
    entry = next(e for e in fixture_registry() if e.name == name)
    result = check_fixture(entry)
    assert result.ok, result.to_dict()


def test_four_by_four_orbit_moves_away_from_the_watched_region():
    entry = next(e for e in fixture_registry() if e.name == "four_by_four")
    results = {name: ok for name, ok, _ in check_fixture(entry).results}
    assert results["indifferent_b"] and results["face_return_farther"]


def test_endpoint_family_near_edge_starts():
    entry = next(e for e in fixture_registry() if e.name == "endpoint_family_k=-2/3")
    result = check_fixture(entry).to_dict()
    assert "results" in result


def test_fixtures_module_is_exact():
    assert all(isinstance(v, Fraction) for row in fixtures.shapley().a for v in row)
