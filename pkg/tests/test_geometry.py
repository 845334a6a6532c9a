from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given

from fpgeom import fixtures
from fpgeom.errors import UnsupportedConfiguration
from fpgeom.game_core import best_response_set, payoff_vector
from fpgeom.geometry import (
    IIPClass,
    best_response_polygons,
    classify_iip,
    configuration_pattern,
    indifferent_lines,
    indifferent_point,
)
from helpers import random_float_game, random_without_iip_games, rational_games


def test_comparison_game_indifferent_points_exact():
    game = fixtures.comparison_game()
    assert indifferent_point(game, "A").point.weights == (F(5, 6), F(-1, 2), F(2, 3))
    assert indifferent_point(game, "B").point.weights == (F(-1, 2), F(5, 6), F(2, 3))


def test_four_by_four_indifferent_point_exact():
    res = indifferent_point(fixtures.four_by_four_symmetric(), "B")
    assert res.point.weights == (F(-5, 2988), F(185, 747), F(1471, 1494), F(-689, 2988))
    assert not res.is_internal


def test_shapley_has_internal_point():
    assert classify_iip(fixtures.shapley()) == IIPClass.WITH_IIP


@pytest.mark.parametrize("maker", [fixtures.pure_ne_game, fixtures.comparison_game])
def test_without_iip_fixtures(maker):
    assert classify_iip(maker()) == IIPClass.WITHOUT_IIP


def test_non_square_indifferent_point_unsupported():
    from fpgeom.game_core import PayoffBimatrix

    game = PayoffBimatrix.from_lists([[1, 2, 3], [3, 1, 2]], [[1, 0, 0], [0, 1, 0]])
    with pytest.raises(UnsupportedConfiguration):
        indifferent_point(game, "A")


@given(rational_games())
def test_indifferent_point_residual_exact(game):
    for player in ("A", "B"):
        res = indifferent_point(game, player)
        if res.point is None:
            continue
        values = payoff_vector(game, player, res.point.weights)
        assert len(set(values)) == 1
        assert sum(res.point.weights) == 1


def test_indifferent_point_residual_float():
    rng = np.random.Generator(np.random.PCG64(8))
    for _ in range(100):
        game = random_float_game(rng)
        res = indifferent_point(game, "A")
        values = payoff_vector(game, "A", res.point.weights)
        assert max(values) - min(values) < 1e-9


def test_polygons_partition_the_simplex():
    rng = np.random.Generator(np.random.PCG64(9))
    grid = [(i / 31, j / 31, 1 - (i + j) / 31) for i in range(32) for j in range(32 - i)]
    for _ in range(100):
        game = random_float_game(rng)
        for player in ("A", "B"):
            polys = best_response_polygons(game, player)
            assert abs(sum(p.area for p in polys) - 1) < 1e-9
            for pt in grid[::3]:
                replies = best_response_set(game, player, pt, tol=1e-7)
                strict = best_response_set(game, player, pt, tol=0)
                if len(replies) > 1:
                    continue  # within 1e-7 of a boundary
                (action,) = strict
                assert polys[action].contains(pt, tol=1e-12)
                assert not any(polys[k].contains(pt, tol=-1e-9) for k in range(3) if k != action)


def test_tie_segments_are_ties():
    for game in random_without_iip_games(10, 30):
        for player in ("A", "B"):
            for seg in indifferent_lines(game, player):
                j, k = seg.pair
                a, b = seg.endpoints
                for t in (0.1, 0.3, 0.5, 0.7, 0.9):
                    pt = tuple(u + t * (v - u) for u, v in zip(a, b))
                    vals = payoff_vector(game, player, pt)
                    assert abs(vals[j] - vals[k]) < 1e-9
                    other = 3 - j - k
                    assert vals[j] > vals[other] - 1e-12


def test_region_interiors_have_single_reply():
    for game in random_without_iip_games(12, 20):
        for player in ("A", "B"):
            for poly in best_response_polygons(game, player):
                if len(poly.vertices) < 3:
                    continue
                centre = tuple(sum(v[k] for v in poly.vertices) / len(poly.vertices) for k in range(3))
                assert best_response_set(game, player, centre, tol=0) == {poly.action}


def test_shapley_regions_each_hold_one_vertex():
    polys = best_response_polygons(fixtures.shapley(), "A")
    for poly in polys:
        assert len(poly.vertices) == 4
        assert poly.area == F(1, 3)
        vertices = [v for v in poly.vertices if sorted(v) == [0, 0, 1]]
        assert len(vertices) == 1


def test_comparison_game_two_segments_for_a():
    assert len(indifferent_lines(fixtures.comparison_game(), "A")) == 2


def test_without_iip_segment_bound_and_pattern():
    for game in random_without_iip_games(13, 100):
        for player in ("A", "B"):
            segs = indifferent_lines(game, player)
            assert len(segs) <= 2
            assert configuration_pattern(game, player) in ("a", "b")
