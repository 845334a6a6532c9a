import json
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpgeom import fixtures
from fpgeom.errors import GameInputError, GameParseError
from fpgeom.game_core import (
    CONTINUUM,
    MIXED,
    PURE,
    ActionPermutationPair,
    PayoffBimatrix,
    SimplexPoint,
    apply_equivalence,
    best_response_set,
    check_nondegenerate,
    enumerate_equilibria,
    is_quasi_supermodular,
    load_game,
    loads_game,
    permute_profile,
    save_game,
    verify_equilibrium,
)
from helpers import random_nondegenerate_games, rational_games, simplex_points


def test_rational_entries_parse_from_strings():
    game = PayoffBimatrix.from_lists([["1/3", "2"], ["0", "-1/2"]], [[0, 1], [1, 0]], "rational")
    assert game.a[0][0] == F(1, 3)
    assert game.b[1][0] == 1
    assert game.exact


def test_ragged_matrix_rejected():
    with pytest.raises(GameInputError):
        PayoffBimatrix.from_lists([[1, 2], [3]], [[1, 2], [3, 4]])


def test_shape_mismatch_rejected():
    with pytest.raises(GameInputError):
        PayoffBimatrix.from_lists([[1, 2]], [[1, 2], [3, 4]])


def test_parse_error_names_json_position():
    with pytest.raises(GameParseError) as info:
        loads_game('{"A": [[1, 2], [3, 4]],\n "B": [[1, 2] [3, 4]]}')
    assert "line 2" in str(info.value)


def test_parse_error_names_missing_field():
    with pytest.raises(GameParseError) as info:
        loads_game('{"A": [[1]]}')
    assert "B" in str(info.value)


def test_declared_size_checked():
    with pytest.raises(GameParseError):
        loads_game(json.dumps({"n": 3, "A": [[1, 2], [3, 4]], "B": [[1, 2], [3, 4]]}))


def test_round_trip_through_file(tmp_path):
    game = fixtures.comparison_game()
    path = tmp_path / "g.json"
    save_game(game, path)
    assert load_game(path) == game


def test_simplex_point_validation():
    SimplexPoint((F(1, 2), F(1, 2)), "A")
    with pytest.raises(GameInputError):
        SimplexPoint((F(1, 2), F(1, 3)), "A")
    with pytest.raises(GameInputError):
        SimplexPoint((F(3, 2), F(-1, 2)), "B")


def test_shapley_unique_barycentric_equilibrium():
    eqs = enumerate_equilibria(fixtures.shapley())
    assert len(eqs) == 1
    third = F(1, 3)
    assert eqs[0].x == (third,) * 3 and eqs[0].y == (third,) * 3
    assert eqs[0].kind == MIXED


def test_pure_game_unique_equilibrium():
    eqs = enumerate_equilibria(fixtures.pure_ne_game())
    assert [(e.kind, e.x, e.y) for e in eqs] == [(PURE, (0, 0, 1), (1, 0, 0))]


def test_comparison_game_equilibrium_exact():
    eqs = enumerate_equilibria(fixtures.comparison_game())
    assert len(eqs) == 1
    assert eqs[0].x == (0, F(2, 3), F(1, 3)) and eqs[0].y == (0, F(1, 3), F(2, 3))


def test_continuum_reported_for_degenerate_member():
    eqs = enumerate_equilibria(fixtures.continuum_family(F(-2, 3)))
    segs = [e for e in eqs if e.kind == CONTINUUM]
    assert len(segs) == 1
    for ex, ey in segs[0].endpoints:
        assert verify_equilibrium(fixtures.continuum_family(F(-2, 3)), ex, ey)


def test_nondegeneracy_witnesses():
    ok, bad = check_nondegenerate(fixtures.endpoint_family(0))
    assert not ok
    assert any(action == 0 and replies == (0, 1) for _, action, replies in bad)
    assert check_nondegenerate(fixtures.shapley())[0]


def test_comparison_game_not_quasi_supermodular():
    assert not is_quasi_supermodular(fixtures.comparison_game())


@given(rational_games(), simplex_points(), st.fractions(min_value=F(1, 10), max_value=10), st.lists(st.fractions(-3, 3), min_size=3, max_size=3))
def test_best_reply_invariant_under_scaling_and_column_offsets(game, y, scale, offsets):
    moved = apply_equivalence(game, scale_a=scale, offsets_a=offsets)
    assert best_response_set(moved, "A", y) == best_response_set(game, "A", y)


def test_best_reply_invariance_on_random_sample():
    rng = np.random.Generator(np.random.PCG64(5))
    for game in random_nondegenerate_games(11, 5):
        moved = apply_equivalence(game, scale_a=2.5, offsets_a=[0.3, -1.0, 4.0])
        for _ in range(100):
            y = tuple(rng.dirichlet(np.ones(3)))
            assert best_response_set(moved, "A", y, tol=1e-12) == best_response_set(game, "A", y, tol=1e-12)


@pytest.mark.parametrize("name", ["shapley", "pure_ne_game", "comparison_game"])
@pytest.mark.parametrize("perm", [((1, 2, 0), (0, 2, 1)), ((2, 1, 0), (1, 0, 2))])
def test_permutation_covariance(name, perm):
    game = getattr(fixtures, name)()
    pair = ActionPermutationPair(*perm)
    moved = apply_equivalence(game, perm=pair)
    want = sorted(permute_profile(e.x, e.y, pair) for e in enumerate_equilibria(game))
    got = sorted((e.x, e.y) for e in enumerate_equilibria(moved))
    assert got == want


def test_isolated_equilibrium_count_is_odd():
    for game in random_nondegenerate_games(2024, 200):
        eqs = enumerate_equilibria(game)
        assert all(e.kind != CONTINUUM for e in eqs)
        assert len(eqs) % 2 == 1


@given(rational_games())
def test_records_are_equilibria_with_matching_supports(game):
    for rec in enumerate_equilibria(game):
        if rec.kind == CONTINUUM:
            for ex, ey in rec.endpoints:
                assert verify_equilibrium(game, ex, ey)
            continue
        assert verify_equilibrium(game, rec.x, rec.y)
        assert rec.support_a == tuple(k for k, w in enumerate(rec.x) if w > 0)
        assert rec.support_b == tuple(k for k, w in enumerate(rec.y) if w > 0)


def test_float_records_pass_at_loose_tolerance():
    for game in random_nondegenerate_games(3, 50):
        for rec in enumerate_equilibria(game):
            assert verify_equilibrium(game, rec.x, rec.y, tol=1e-9)
