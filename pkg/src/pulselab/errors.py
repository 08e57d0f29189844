"""Typed errors raised by the pulselab API.

Two broad families matter to callers: ``FormatError`` for unreadable or
malformed input files, and ``PreconditionError`` for structurally valid
input that violates an operation's contract. The CLI maps these onto
distinct exit codes.
"""


class PulseLabError(Exception):
    """Base class for all pulselab errors."""


class FormatError(PulseLabError):
    """An input file could not be parsed or has the wrong layout."""


class PreconditionError(PulseLabError, ValueError):
    """An operation was called with input violating its contract."""


# signal handling
class TooFewSamples(PreconditionError):
    """Not enough samples for the requested operation."""


class NonMonotonicTimestamps(PreconditionError):
    """Timestamps must be strictly increasing."""


class EmptySignal(PreconditionError):
    """The operation requires a non-empty signal."""


class InvalidBand(PreconditionError):
    """Band edges outside (0, Nyquist) or low >= high."""


class SignalTooShort(PreconditionError):
    """Signal shorter than the filter requires."""


class OutOfOrderChunk(PreconditionError):
    """A streaming chunk arrived out of order."""


class EmptyTrace(PreconditionError):
    """An RGB trace with no frames was supplied."""


# biometrics
class NoValidIbis(PreconditionError):
    """No valid inter-beat intervals available."""


class TooFewIbis(PreconditionError):
    """At least two inter-beat intervals are required."""


class EmptyInput(PreconditionError):
    """Empty input sequence."""


class DegenerateWindow(PreconditionError):
    """All intervals identical (zero spread), the statistic is undefined."""


# evaluation metrics
class LengthMismatch(PreconditionError):
    """Predicted and target sequences differ in length."""


class ZeroTarget(PreconditionError):
    """A target value of zero makes the percentage error undefined."""


class TooFewPoints(PreconditionError):
    """At least two points are required for a correlation."""


class MissingVerifiedPeaks(PreconditionError):
    """The verified-peaks protocol requires a peak-time list."""


# monitoring / synthesis
class NonMonotonicTimestamp(NonMonotonicTimestamps):
    """A pushed frame must be strictly later than the previous one."""


class InsufficientSamples(PreconditionError):
    """Not enough processed frames for timing statistics."""


class InvalidSpec(PreconditionError):
    """A synthesis or configuration spec violates its invariants."""
