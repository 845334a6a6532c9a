import json

import pytest
from click.testing import CliRunner

from fpgeom import fixtures, save_game
from fpgeom.cli import EXIT_EXPECTATION, EXIT_PARSE, EXIT_UNSUPPORTED, main
from fpgeom.experiments import build_mixed_sink_fixture


@pytest.fixture(scope="module")
def games(tmp_path_factory):
    root = tmp_path_factory.mktemp("games")
    paths = {}
    for name, game in {
        "shapley": fixtures.shapley(),
        "pure_ne": fixtures.pure_ne_game(),
        "comparison": fixtures.comparison_game(),
        "four_by_four": fixtures.four_by_four_symmetric(),
        "canonical": build_mixed_sink_fixture().game,
    }.items():
        path = root / f"{name}.json"
        save_game(game, str(path))
        paths[name] = str(path)
    bad = root / "bad.json"
    bad.write_text('{"n": 3, "m": 3, "A": [[1, 2]]}')
    paths["bad"] = str(bad)
    return paths


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_analyze_shapley_text(games):
    res = run("analyze", games["shapley"])
    assert res.exit_code == 0
    assert "WithIIP" in res.output
    assert "x=(1/3, 1/3, 1/3)" in res.output


def test_analyze_json_is_versioned(games):
    res = run("analyze", games["comparison"], "--json")
    data = json.loads(res.output)
    assert data["schema"] == 1
    assert data["iip_class"] == "WithoutIIP"
    assert data["quasi_supermodular"] is False


def test_analyze_unique_pure_equilibrium(games):
    data = json.loads(run("analyze", games["pure_ne"], "--json").output)
    assert len(data["equilibria"]) == 1
    eq = data["equilibria"][0]
    assert eq["kind"] == "pure"
    assert eq["x"] == ["0", "0", "1"] and eq["y"] == ["1", "0", "0"]


def test_missing_and_malformed_files_exit_3(games, tmp_path):
    assert run("analyze", str(tmp_path / "none.json")).exit_code == EXIT_PARSE
    res = run("analyze", games["bad"])
    assert res.exit_code == EXIT_PARSE
    assert "error" in res.output


def test_usage_errors_exit_2(games):
    assert run("simulate", games["shapley"]).exit_code == 2
    assert run("simulate", games["shapley"], "--kind", "nope").exit_code == 2
    assert run("simulate", games["shapley"], "--kind", "cfp", "--x", "a,b,c").exit_code == 2


def test_simulate_shapley_dfp_cycles(games):
    res = run("simulate", games["shapley"], "--kind", "dfp", "--steps", 100000)
    assert res.exit_code == 0
    assert "LimitCycle" in res.output


def test_simulate_random_starts_all_converge(games):
    res = run("simulate", games["pure_ne"], "--kind", "cfp", "--random", "7:100", "--expect", "ConvergedToNE")
    assert res.exit_code == 0
    assert "ConvergedToNE: 100/100" in res.output


def test_failed_expectation_exits_4(games):
    res = run("simulate", games["shapley"], "--kind", "cfp", "--x", "1,0,0", "--y", "0,1,0", "--expect", "ConvergedToNE")
    assert res.exit_code == EXIT_EXPECTATION


def test_pbrd_on_game_with_iip_is_unsupported(games):
    assert run("simulate", games["shapley"], "--kind", "pbrd").exit_code == EXIT_UNSUPPORTED
    assert run("project", games["shapley"]).exit_code == EXIT_UNSUPPORTED


def test_simulate_writes_csv_and_svg(games, tmp_path):
    csv_path, svg_path = tmp_path / "t.csv", tmp_path / "t.svg"
    res = run("simulate", games["comparison"], "--kind", "cfp", "--csv", csv_path, "--svg", svg_path)
    assert res.exit_code == 0
    assert csv_path.read_text().startswith("time,x0,x1,x2,y0,y1,y2,action_i")
    assert svg_path.read_text().startswith("<svg")


def test_simulate_json(games):
    data = json.loads(run("simulate", games["comparison"], "--kind", "brd", "--json").output)
    assert data["schema"] == 1


def test_face_return_is_printed(games):
    res = run("simulate", games["four_by_four"], "--kind", "sym-brd", "--start-face", "0.8094,0.4041")
    assert res.exit_code == 0
    assert "return point: 0.3203, 0.2738" in res.output


def test_project_reports_square(games):
    res = run("project", games["canonical"])
    assert res.exit_code == 0
    assert json.loads(res.output)["schema"] == 1


def test_poincare_checks_against_simulation(games):
    for name in ("pure_ne", "canonical"):
        res = run("poincare", games[name], "--check", 5)
        assert res.exit_code == 0, res.output
        data = json.loads(res.output)
        assert data["schema"] == 1
        assert data["contraction"]["ok"]
        assert data["oracle"]["max_gap"] < 1e-9


def test_poincare_unsupported_arrangement(games):
    assert run("poincare", games["comparison"]).exit_code == EXIT_UNSUPPORTED


def test_sample_reports_proportion():
    res = run("sample", "--dim", 3, "--trials", 3000, "--seed", 42)
    data = json.loads(res.output)
    assert data["reports"][0]["trials"] == 3000
    assert run("sample", "--dim", 3, "--trials", 1000, "--expect-above", 0.99).exit_code == EXIT_EXPECTATION
    assert run("sample", "--dim", 9).exit_code == 2


def test_sweep_detects_shift():
    res = run("sweep", "--family", "example5", "--no-simulate", "--expect-shift", "-2/3")
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["schema"] == 1
    assert run("sweep", "--family", "example6", "--no-simulate", "--grid", "0:1/2:5", "--expect-shift", "-2/3").exit_code == EXIT_EXPECTATION


def test_examples_list_and_run():
    res = run("examples", "list")
    assert "shapley" in res.output and "canonical_mixed_sink" in res.output
    res = run("examples", "run", "shapley", "pure_ne")
    assert res.exit_code == 0, res.output


def test_examples_run_unknown_name_is_usage_error():
    assert run("examples", "run", "nope").exit_code == 2


def test_small_theorem_run():
    res = run("examples", "theorem", "--trials", 10, "--starts", 1)
    assert res.exit_code == 0, res.output


def test_version():
    res = run("--version")
    assert res.exit_code == 0 and "0.1.0" in res.output
