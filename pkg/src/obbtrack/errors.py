"""Exception taxonomy shared by all modules."""


class TrackingError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(TrackingError):
    """Caller passed data violating a precondition (non-finite, degenerate, duplicate ids)."""


class ConfigurationError(TrackingError):
    """A configuration value is outside its declared set or references an unknown entity."""


class UndefinedMeanError(TrackingError):
    """Circular mean requested for an antipodally cancelling angle set."""


class UndefinedMetricError(TrackingError):
    """A metric's denominator is empty (no ground truth, predictions, or matched pairs)."""


class StreamOrderError(TrackingError):
    """Frame timestamps are not strictly increasing."""


class InternalStateError(TrackingError):
    """Tracker state violated an internal invariant."""


class AlignmentError(TrackingError):
    """Two streams that must share a frame-by-frame timeline do not."""


class ParseError(TrackingError):
    """A stream or config file could not be parsed; carries the offending line."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
