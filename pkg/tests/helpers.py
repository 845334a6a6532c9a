"""Shared generators for the test-suite."""

from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from fpgeom.game_core import PayoffBimatrix, check_nondegenerate
from fpgeom.geometry import IIPClass, classify_iip


def random_float_game(rng, n=3, m=3):
    return PayoffBimatrix.from_lists(rng.random((n, m)).tolist(), rng.random((n, m)).tolist(), "float", "random")


def random_without_iip_games(seed, count):
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    while len(out) < count:
        game = random_float_game(rng)
        if classify_iip(game) == IIPClass.WITHOUT_IIP and check_nondegenerate(game)[0]:
            out.append(game)
    return out


def random_nondegenerate_games(seed, count):
    rng = np.random.Generator(np.random.PCG64(seed))
    out = []
    while len(out) < count:
        game = random_float_game(rng)
        if check_nondegenerate(game)[0]:
            out.append(game)
    return out


small_fraction = st.fractions(min_value=-5, max_value=5, max_denominator=12)
matrix3 = st.lists(st.lists(small_fraction, min_size=3, max_size=3), min_size=3, max_size=3)


@st.composite
def rational_games(draw):
    return PayoffBimatrix.from_lists(draw(matrix3), draw(matrix3), "rational", "drawn")


@st.composite
def simplex_points(draw, size=3):
    raw = draw(st.lists(st.integers(min_value=0, max_value=50), min_size=size, max_size=size).filter(lambda v: sum(v) > 0))
    total = sum(raw)
    return tuple(Fraction(v, total) for v in raw)


def as_floats(v):
    return tuple(float(t) for t in v)
