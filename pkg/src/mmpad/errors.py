"""Exception types shared across the package."""


class MmpadError(Exception):
    """Base class for every error this package raises on purpose."""


class SeriesFormatError(MmpadError):
    """CSV structure is unusable: missing header, no data columns, no rows."""


class SeriesParseError(MmpadError):
    """A cell failed to parse; the message carries the line and column."""


class LabelError(MmpadError):
    """A label value is not 0 or 1, or the label vector has the wrong shape."""


class InsufficientDataError(MmpadError):
    """The operation needs more samples than the series provides."""


class WindowError(MmpadError):
    """The window length is invalid for the series (m < 2, m > n, or n < 2m)."""


class ParameterError(MmpadError):
    """A numeric parameter is outside its documented range."""


class MetricError(MmpadError):
    """A metric is undefined for the given labels, or inputs are inconsistent."""
