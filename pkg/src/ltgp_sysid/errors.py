"""Exception types raised across the package.

All of them derive from ``ValueError`` so callers that only care about
"bad input" can catch one thing.
"""


class LtgpError(ValueError):
    """Base class for package errors."""


class InvalidParameterError(LtgpError):
    pass


class ShapeError(LtgpError):
    pass


class NumericError(LtgpError):
    pass


class RankDeficiencyError(LtgpError):
    pass


class DegenerateDenominatorError(LtgpError):
    pass


class ParseError(LtgpError):
    """Malformed input file. ``line`` is 1-based and counts the header."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderingError(ParseError):
    pass


class RangeError(LtgpError):
    pass


class ConfigError(LtgpError):
    pass


class EmptyDatasetError(LtgpError):
    pass
