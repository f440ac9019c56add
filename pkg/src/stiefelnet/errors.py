"""Exception types shared across the toolkit."""


class StiefelNetError(Exception):
    """Base class for all toolkit errors."""


class RankDeficientError(StiefelNetError):
    """A matrix headed for polar projection is (numerically) rank deficient.

    Raised when the smallest singular value falls at or below the projection
    threshold, i.e. the nearest orthonormal factor is no longer well defined.
    During a solver run this signals that an iterate left the neighborhood
    where the projection is unique (step size too large); the failing
    iteration index is attached when available.
    """

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class DimensionMismatchError(StiefelNetError):
    """Operands have incompatible shapes."""


class NotConnectedError(StiefelNetError):
    """The communication graph is not connected (or could not be made so)."""


class InvalidDimsError(StiefelNetError):
    """Problem generator called with inconsistent dimensions."""


class BatchTooLargeError(StiefelNetError):
    """Requested batch size exceeds the local sample count."""


class BadMagicError(StiefelNetError):
    """Binary file does not start with the expected magic number."""


class TruncatedFileError(StiefelNetError):
    """Binary file ended before the declared payload was read."""


class ParseError(StiefelNetError):
    """Config text is malformed; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(StiefelNetError):
    """A config field has an invalid value; carries the field name."""

    def __init__(self, field: str, message: str = ""):
        detail = f": {message}" if message else ""
        super().__init__(f"{field}{detail}")
        self.field = field


class InsufficientPointsError(StiefelNetError):
    """A regression/scaling check was asked to run on fewer than two points."""
