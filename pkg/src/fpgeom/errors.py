class GameInputError(ValueError):
    """Malformed game, strategy or parameter."""


class GameParseError(GameInputError):
    """A game file could not be parsed. ``where`` names the line or field."""

    def __init__(self, message, where=None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class UnsupportedConfiguration(Exception):
    """The requested analysis does not apply to this game or geometry."""

    def __init__(self, message, detail=None):
        self.detail = detail
        super().__init__(message)


class ConsistencyError(RuntimeError):
    """An internal geometric invariant failed (signals a bug or misclassification)."""
