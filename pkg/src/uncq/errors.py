"""Exception hierarchy shared by all uncq modules.

File-format problems each get their own class so callers (and the CLI exit
codes) can tell corrupt inputs apart from usage or numerical failures.
"""


class UncqError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(UncqError):
    """Two distributions or batches have incompatible class counts."""


class ConfigurationError(UncqError):
    """An option or parameter is outside its documented range."""


class DataFormatError(UncqError):
    """Base class for malformed input files."""


class BadMagicError(DataFormatError):
    """File does not start with the expected magic bytes."""


class TruncatedPayloadError(DataFormatError):
    """File ends before the declared payload or footer is complete."""


class ChecksumError(DataFormatError):
    """Footer check value does not match the payload."""


class RowSumError(DataFormatError):
    """A probability row does not sum to one within tolerance."""


class IdentifierMismatchError(DataFormatError):
    """Record identifiers do not line up between two inputs."""


class NumericalFailureError(UncqError):
    """A numerical routine could not reach its target tolerance."""

    def __init__(self, message: str, achieved_tolerance: float | None = None):
        super().__init__(message)
        self.achieved_tolerance = achieved_tolerance


class FamilyInfeasibleError(UncqError):
    """A requested target value is unreachable within a posterior family."""

    def __init__(self, family: str, message: str):
        super().__init__(message)
        self.family = family
