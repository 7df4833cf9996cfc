"""Exception types shared across the toolkit."""


class WattlensError(Exception):
    """Base class for all wattlens errors."""


class MalformedRecord(WattlensError):
    """A stream line or manifest field could not be parsed or violates its schema."""


class NonMonotonicTimestamp(WattlensError):
    """Timestamps in a stream (or across manifest and stream) go backwards."""


class DuplicateTimestamp(WattlensError):
    """Two records in one stream share a timestamp; interval energy is undefined."""


class CoverageError(WattlensError):
    """The power stream does not span the token stream."""


class EmptyTokenStream(WattlensError):
    """A trace contains no token events."""


class EmptyInput(WattlensError):
    """An operation that needs at least one element received none."""


class ZeroTokens(WattlensError):
    """Per-token average requested for a zero-token output."""


class NoDecodeTokens(WattlensError):
    """Decoding-phase average requested for a single-token output."""


class InsufficientPoints(WattlensError):
    """Too few decode points to fit a trend line."""


class NonPositiveIntercept(WattlensError):
    """Amplification is undefined for non-positive fitted intercepts."""


class AllTracesRemoved(WattlensError):
    """Outlier filtering removed every trace in a group."""


class SessionAlreadyHalted(WattlensError):
    """A token was fed to a suppression session that already halted."""


class SourceError(WattlensError):
    """A token source failed while being consumed."""


class InfeasibleSamplingWarning(UserWarning):
    """Sample period exceeds token duration; some intervals will hold no samples."""
