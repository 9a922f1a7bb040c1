"""Exception hierarchy.

Ingestion errors (`IngestError` subclasses) map to CLI exit code 2,
`TrackMismatch` to 3 and `InfeasibleProfile` to 4.
"""

from __future__ import annotations


class LapbenchError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(LapbenchError, ValueError):
    """Input data could not be turned into valid telemetry."""


class EmptySeries(IngestError):
    pass


class NonUniformSampling(IngestError):
    def __init__(self, worst_gap: float, dt: float, index: int):
        self.worst_gap = worst_gap
        self.dt = dt
        self.index = index
        super().__init__(
            f"sample spacing deviates from dt={dt:.9g} s: worst gap {worst_gap:.9g} s at index {index}"
        )


class NonFiniteValue(IngestError):
    def __init__(self, channel: str, index: int):
        self.channel = channel
        self.index = index
        super().__init__(f"non-finite value in channel '{channel}' at index {index}")


class ChannelRangeError(IngestError):
    def __init__(self, channel: str, index: int, value: float):
        self.channel = channel
        self.index = index
        self.value = value
        super().__init__(f"channel '{channel}' out of range at index {index}: {value!r}")


class MissingRequiredColumn(IngestError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing required column '{name}'")


class UnparsableCell(IngestError):
    def __init__(self, row: int, col: str, text: str):
        self.row = row
        self.col = col
        self.text = text
        super().__init__(f"cannot parse cell at row {row}, column '{col}': {text!r}")


class NonMonotonicTime(IngestError):
    def __init__(self, row: int):
        self.row = row
        super().__init__(f"time decreases at row {row}")


class SpanTooShort(IngestError):
    pass


class SamplingGap(IngestError):
    """A time gap (or a run of missing values) longer than the allowed maximum."""


class NoLapBoundaryFound(IngestError):
    """No lap boundary in the series.

    The partial segments found are kept on ``segments`` (all flagged as
    out-laps) so callers can still use them.
    """

    def __init__(self, message: str, segments: list | None = None):
        self.segments = segments or []
        super().__init__(message)


class WindowTooSmall(LapbenchError, ValueError):
    pass


class SeriesTooShort(LapbenchError, ValueError):
    pass


class MissingChannel(LapbenchError, ValueError):
    pass


class NoCorners(LapbenchError):
    pass


class NoBrakingEvents(LapbenchError):
    pass


class RefTooFar(LapbenchError, ValueError):
    pass


class BaselineZero(LapbenchError, ZeroDivisionError):
    pass


class TrackMismatch(LapbenchError, ValueError):
    pass


class CutoffAboveNyquist(LapbenchError, ValueError):
    pass


class InfeasibleProfile(LapbenchError, ValueError):
    pass


class OpenTrackWhenClosedRequired(LapbenchError, ValueError):
    pass
