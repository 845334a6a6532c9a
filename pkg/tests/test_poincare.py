import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpgeom import fixtures
from fpgeom.errors import UnsupportedConfiguration
from fpgeom.experiments import build_mixed_sink_fixture
from fpgeom.poincare import (
    EIGHT,
    FOUR,
    SIX,
    MoebiusMap,
    build_return_map,
    compose,
    distance_to_cell,
    mixed_stage_maps,
    pure_stage_maps,
    simulate_first_return,
    verify_contraction,
)
from fpgeom.projection import build_projected_square

EIGHT_PATH = ["II", "III", "VI", "V", "VIII", "VII", "IV", "I"]
SIX_PATH = ["II", "V", "VIII", "VII", "IV", "I"]
FOUR_PATH = ["II", "V", "IV", "I"]
PURE_PATH = ["I", "IV", "VII", "VIII", "IX", "VI", "III", "II"]


@pytest.fixture(scope="module")
def mixed():
    game = build_mixed_sink_fixture().game
    return build_return_map(build_projected_square(game))


@pytest.fixture(scope="module")
def pure():
    return build_return_map(build_projected_square(fixtures.pure_ne_game()))


positive = st.floats(min_value=0.05, max_value=5.0)


@given(positive, positive, positive, positive, st.floats(min_value=0.0, max_value=2.0))
def test_moebius_composition_closes(a1, d1, a2, d2, x):
    f = MoebiusMap(a1, 0.3, 1.0, d1)
    g = MoebiusMap(a2, -0.1, 0.5, d2)
    direct = g(f(x))
    assert g.after(f)(x) == pytest.approx(direct, rel=1e-12, abs=1e-12)
    assert compose([f, g])(x) == pytest.approx(direct, rel=1e-12, abs=1e-12)
    assert f.inverse()(f(x)) == pytest.approx(x, rel=1e-12, abs=1e-12)


@given(positive, positive, st.floats(min_value=0.0, max_value=2.0))
def test_moebius_derivative_matches_difference(a, d, x):
    f = MoebiusMap(a, 0.2, 1.0, d)
    h = 1e-6
    numeric = (f(x + h) - f(x - h)) / (2 * h)
    assert f.derivative(x) == pytest.approx(numeric, rel=1e-5, abs=1e-9)


def test_stage_closed_forms_on_canonical_parameters(mixed):
    prm = mixed.params
    p, q, r, P, Q, R, M, m = (prm[k] for k in ("p", "q", "r", "P", "Q", "R", "M", "m"))
    stages = mixed_stage_maps(p, q, r, P, Q, R, M, m)
    d = 0.3
    d1 = (r * d - q * (Q + R)) / (q + r)
    d2 = r * d1 / (d1 + M)
    d3 = M * d2 / (d2 + p + q)
    assert stages[0](d) == pytest.approx(d1, abs=1e-15)
    assert stages[1](d1) == pytest.approx(d2, abs=1e-15)
    assert stages[2](d2) == pytest.approx(d3, abs=1e-15)
    assert mixed.d_C == pytest.approx(q * (Q + R) / r, abs=1e-15)
    assert mixed.d_c == pytest.approx(p * Q * (Q + R) / ((q + r) * R - p * Q), abs=1e-15)


def test_canonical_parameters_are_frozen(mixed):
    want = {"p": 0.1, "q": 0.2, "r": 0.7, "P": 0.6, "Q": 0.1, "R": 0.3, "M": 0.05, "m": 0.05}
    for key, value in want.items():
        assert mixed.params[key] == pytest.approx(value, abs=1e-12)
    assert mixed.d_c == pytest.approx(0.0153846153846, abs=1e-12)
    assert mixed.d_C == pytest.approx(0.1142857142857, abs=1e-12)


def test_pure_stages_are_eight_positive_maps(pure):
    prm = pure.params
    stages = pure_stage_maps(*(prm[k] for k in ("p", "q", "r", "P", "Q", "R", "M", "m")))
    assert len(stages) == 8
    values = pure.stage_values(pure.section_length * 0.5)
    assert all(v > 0 for v in values)


@pytest.mark.parametrize("which", ["mixed", "pure"])
def test_return_map_matches_simulated_orbit(which, request):
    analysis = request.getfixturevalue(which)
    length = analysis.section_length
    lo = analysis.d_C if which == "pure" else 0.0
    for k in range(1, 21):
        d0 = lo + (length - lo) * k / 21
        value, _ = analysis.evaluate(d0)
        simulated, _ = simulate_first_return(analysis, d0)
        assert simulated == pytest.approx(value, abs=1e-9)


def test_thresholds_split_the_paths(mixed):
    length = mixed.section_length
    expected = {EIGHT: EIGHT_PATH, SIX: SIX_PATH, FOUR: FOUR_PATH}
    seen = set()
    for k in range(1, 51):
        d0 = length * k / 51
        _, kind = mixed.evaluate(d0)
        _, path = simulate_first_return(mixed, d0)
        assert path == expected[kind]
        seen.add(kind)
    assert seen == {EIGHT, SIX, FOUR}


def test_pure_loop_surrounds_all_outer_cells(pure):
    for k in range(1, 11):
        d0 = pure.d_C + (pure.section_length - pure.d_C) * k / 11
        _, path = simulate_first_return(pure, d0)
        assert path == PURE_PATH
        assert "V" not in path


def test_eight_and_six_cell_maps_agree_at_the_threshold(mixed):
    d = mixed.d_C
    eight = compose(list(mixed.stages))(d + 1e-12)
    six = mixed.extras["six"](d)
    assert eight == pytest.approx(six, abs=1e-9)


def test_six_and_four_cell_maps_agree_at_the_threshold(mixed):
    d = mixed.d_c
    assert mixed.extras["six"](d) == pytest.approx(mixed.extras["four"](d), abs=1e-12)


@pytest.mark.parametrize("which", ["mixed", "pure"])
def test_gap_is_positive_and_increasing(which, request):
    analysis = request.getfixturevalue(which)
    lo, hi = analysis.d_C, analysis.section_length
    grid = [lo + (hi - lo) * k / 100 for k in range(1, 101)]
    gaps = [d - analysis.evaluate(d)[0] for d in grid]
    assert all(g > 0 for g in gaps)
    assert all(b > a for a, b in zip(gaps, gaps[1:]))


def test_mixed_map_contracts(mixed):
    cert = verify_contraction(mixed)
    assert cert.ok
    assert cert.sup_derivative == pytest.approx(0.00887, abs=5e-5)
    assert cert.sup_derivative < cert.analytic_bound < 1
    assert cert.iterations_to_exit == 1


def test_pure_map_drifts_toward_the_inner_threshold(pure):
    cert = verify_contraction(pure)
    assert cert.ok
    assert cert.min_gap > 0
    assert cert.iterations_to_exit == 21
    assert pure.d_C == pytest.approx(2.1477e-4, rel=1e-3)
    assert all(b < a for a, b in zip(cert.orbit, cert.orbit[1:]))


def test_pure_analytic_bound_caps_the_slope(pure):
    cert = verify_contraction(pure)
    prm = pure.params
    p, q, r, P, Q, R = (prm[k] for k in ("p", "q", "r", "P", "Q", "R"))
    assert cert.analytic_bound == pytest.approx(p * P * r * R / ((p + q) * (P + Q) * (q + r) * (Q + R)))
    assert 0 < cert.sup_derivative < 1


def test_serialised_analysis_is_versioned(mixed):
    data = mixed.to_dict()
    assert data["schema"] == 1
    assert len(data["stages"]) == 8
    assert data["symmetry"] is not None


def test_distance_to_cell_v():
    game = build_mixed_sink_fixture().game
    sq = build_projected_square(game)
    cell = sq.cell_by_label("V")
    (x0, x1), (y0, y1) = cell.x_interval, cell.y_interval
    inside = ((float(x0) + float(x1)) / 2, (float(y0) + float(y1)) / 2)
    assert distance_to_cell(sq, inside) == 0
    assert distance_to_cell(sq, (float(x1) + 0.1, inside[1])) == pytest.approx(0.1)
    corner = (float(x1) + 0.03, float(y1) + 0.04)
    assert distance_to_cell(sq, corner) == pytest.approx(0.05)


def test_shapley_has_no_square():
    with pytest.raises(UnsupportedConfiguration):
        build_return_map(build_projected_square(fixtures.shapley()))


def test_wrong_equilibrium_image_is_rejected(mixed):
    with pytest.raises(UnsupportedConfiguration):
        build_return_map(mixed.square, ne_image=(0.9, 0.1))


def test_map_is_nonexpansive_on_the_whole_section(mixed):
    length = mixed.section_length
    pts = [length * k / 400 for k in range(1, 401)]
    vals = [mixed.evaluate(d)[0] for d in pts]
    for (a, fa), (b, fb) in zip(zip(pts, vals), zip(pts[1:], vals[1:])):
        assert abs(fb - fa) <= abs(b - a) + 1e-15
    assert not math.isnan(sum(vals))


def test_noncanonical_arrangement_is_unsupported():
    with pytest.raises(UnsupportedConfiguration):
        build_return_map(build_projected_square(fixtures.comparison_game()))
