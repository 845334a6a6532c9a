"""Geometric analysis of fictitious play and best-response dynamics in small bimatrix games."""

from .errors import ConsistencyError, GameInputError, GameParseError, UnsupportedConfiguration
from .game_core import PayoffBimatrix, enumerate_equilibria, load_game, loads_game, save_game
from .geometry import IIPClass, classify_iip, indifferent_point

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "GameInputError",
    "GameParseError",
    "IIPClass",
    "PayoffBimatrix",
    "UnsupportedConfiguration",
    "classify_iip",
    "enumerate_equilibria",
    "indifferent_point",
    "load_game",
    "loads_game",
    "save_game",
]
