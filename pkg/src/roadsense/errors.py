"""Exception hierarchy shared by all roadsense modules.

The CLI maps these onto exit codes, the HTTP service onto status codes and
``error.code`` strings, so each class carries a stable machine-readable code.
"""

from __future__ import annotations


class RoadsenseError(Exception):
    code = "error"

    def __init__(self, message: str, where: int | None = None):
        super().__init__(message)
        self.message = message
        # CSV line number (1-based, header = 1) or sample index (0-based),
        # depending on where the data came from
        self.where = where


class DataError(RoadsenseError):
    """Input data violates a documented contract."""

    code = "data_error"


# telemetry
class MalformedRow(DataError):
    code = "malformed_row"


class NonMonotonicTime(DataError):
    code = "non_monotonic_time"


class OutOfRange(DataError):
    code = "out_of_range"


class IrregularSampling(DataError):
    code = "irregular_sampling"


class InvalidConfig(DataError):
    code = "invalid_config"


# windows / learn / explore
class LogTooShort(DataError):
    code = "log_too_short"


class TooFewSamples(DataError):
    code = "too_few_samples"


class ClassMissing(DataError):
    code = "class_missing"


class DimensionMismatch(DataError):
    code = "dimension_mismatch"


class LengthMismatch(DataError):
    code = "length_mismatch"


class EmptyInput(DataError):
    code = "empty_input"


class NoPositives(DataError):
    code = "no_positives"


class Unattainable(DataError):
    code = "unattainable"


class DegenerateInput(DataError):
    code = "degenerate_input"


class NoConvergence(RoadsenseError):
    code = "no_convergence"


class ConvergenceWarning(UserWarning):
    """Emitted when an iterative solver stops at its iteration cap."""


# bundle / service / map
class BundleError(DataError):
    code = "bundle_error"


class VersionMismatch(BundleError):
    code = "version_mismatch"


class ChecksumMismatch(BundleError):
    code = "checksum_mismatch"


class Corrupt(BundleError):
    code = "corrupt_bundle"


class BundleLoadError(BundleError):
    code = "bundle_load_error"


class MissingPosition(DataError):
    code = "missing_position"
