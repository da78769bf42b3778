"""Exception types shared across the library."""

from __future__ import annotations


class ReprMetricsError(Exception):
    """Base class for every error raised by this library."""


class FileUnreadableError(ReprMetricsError):
    """The file could not be opened or read."""


class MalformedHeaderError(ReprMetricsError):
    """Array file header or payload does not match the supported format."""


class WrongRankError(ReprMetricsError):
    """The on-disk array is not two-dimensional."""


class NonFiniteValueError(ReprMetricsError):
    """A NaN or infinity was found in the data; reports the first offender."""

    def __init__(self, row: int, col: int, label: str = ""):
        self.row = row
        self.col = col
        where = f" in {label!r}" if label else ""
        super().__init__(f"non-finite value at row {row}, col {col}{where}")


class MatrixTooLargeError(ReprMetricsError):
    """The declared shape exceeds the configured row/column caps."""


class DuplicateEntryError(ReprMetricsError):
    """A manifest lists the same file more than once."""


class EmptyManifestError(ReprMetricsError):
    """A manifest contains no entries."""


class ManifestMismatchError(ReprMetricsError):
    """Paired manifests disagree in length, labels, or expected width."""


class ZeroVectorAfterCenteringError(ReprMetricsError):
    """A token equals the sequence mean, so unit scaling is undefined."""

    def __init__(self, row: int, label: str = ""):
        self.row = row
        where = f" in {label!r}" if label else ""
        super().__init__(
            f"row {row}{where} has zero norm after centering; "
            "the sequence cannot be normalized"
        )


class ConvergenceError(ReprMetricsError):
    """An iterative eigensolver exceeded its iteration cap."""


class NotSymmetricError(ReprMetricsError):
    """Input to a symmetric eigensolver was not symmetric."""


class NotPositiveSemidefiniteError(ReprMetricsError):
    """A covariance matrix produced an eigenvalue below the rounding floor."""


class KOutOfRangeError(ReprMetricsError):
    """Requested truncation does not fit the matrix dimensions."""


class AllZeroSpectrumError(ReprMetricsError):
    """Entropy is undefined for a spectrum that sums to zero."""


class ConfigMismatchError(ReprMetricsError):
    """Two metric bundles were computed with different settings."""


class AllSequencesSkippedError(ReprMetricsError):
    """Every sequence pair in a comparison was degenerate."""
