"""Payoff matrices of the reference games used throughout the test-suite."""

from fractions import Fraction as F

from .game_core import PayoffBimatrix


def shapley():
    a = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    b = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    return PayoffBimatrix.from_lists(a, b, "rational", "shapley")


def ostrovski():
    a = [[-1.35, -1.26, 2.57], [0.16, -1.80, 1.58], [-0.49, -1.54, 1.9]]
    b = [[-1.83, -2.87, -3.36], [-4.80, -3.85, -3.75], [6.740, 6.59, 6.89]]
    return PayoffBimatrix.from_lists(a, b, "float", "ostrovski")


def pure_ne_game():
    """Narrow-region game whose only equilibrium is (e3, e1)."""
    a = [["0", "99/100", "-51/100"], ["0", "0", "1/2"], ["1/100", "1/2", "0"]]
    b = [["0", "-1", "1"], ["-99/100", "0", "-2"], ["1/100", "0", "0"]]
    return PayoffBimatrix.from_lists(a, b, "rational", "pure_ne")


def comparison_game():
    """Without-IIP game that is not quasi-supermodular."""
    a = [[F(1, 3), F(1, 3), 0], [0, F(2, 3), F(2, 3)], [F(-2, 3), 0, 1]]
    b = [[0, F(2, 3), F(1, 3)], [F(-2, 3), 0, F(1, 3)], [1, F(2, 3), 0]]
    return PayoffBimatrix.from_lists(a, b, "rational", "comparison")


def continuum_family(k):
    """Family whose k = -2/3 member has a segment of equilibria that attracts
    trajectories without any single point being approached."""
    k = F(k) if not isinstance(k, float) else F(str(k))
    a = [[0, F(1, 3), -1], [k + F(2, 3), 0, F(-1, 3)], [k, F(4, 3), 0]]
    b = [[0, F(-4, 3), F(2, 3)], [F(-2, 3), 0, -2], [F(1, 3), 0, 0]]
    return PayoffBimatrix.from_lists(a, b, "rational", f"continuum_family(k={k})")


def endpoint_family(k):
    """Family whose k = -2/3 member is degenerate and attracts to one endpoint."""
    k = F(k) if not isinstance(k, float) else F(str(k))
    a = [[0, F(2, 3), F(2, 3)], [F(-2, 3), 0, 1], [F(-2, 3) - k, 1, 0]]
    b = [[0, 0, F(-2, 3)], [F(1, 3), 0, F(-2, 3)], [-1, F(-1, 3), 0]]
    return PayoffBimatrix.from_lists(a, b, "rational", f"endpoint_family(k={k})")


def four_by_four_matrix():
    return [
        [0, -3, F(3, 2), 1],
        [1, 0, -3, -15],
        [-15, 1, 0, -1],
        [-1, F(-39, 20), 1, 0],
    ]


def four_by_four_symmetric():
    """Symmetric 4x4 game (B = A transposed) without an internal indifferent point."""
    a = four_by_four_matrix()
    b = [list(col) for col in zip(*a)]
    return PayoffBimatrix.from_lists(a, b, "rational", "four_by_four")
