"""Exception hierarchy shared by every spiband module."""


class SpibandError(ValueError):
    """Base class for data and configuration errors."""


class RaggedRowsError(SpibandError):
    pass


class OutOfRangeError(SpibandError):
    pass


class NotMonotoneError(SpibandError):
    pass


class NonIncreasingGridError(SpibandError):
    pass


class DimensionMismatchError(SpibandError):
    pass


class EmptyMatrixError(SpibandError):
    pass


class EmptyInputError(SpibandError):
    pass


class TooFewSamplesError(SpibandError):
    pass


class InvalidConfigError(SpibandError):
    pass


class ZeroBaselineError(SpibandError):
    pass


class ParseError(SpibandError):
    pass


class BandIOError(SpibandError, OSError):
    """Raised when a band, report or plot cannot be written or read."""
