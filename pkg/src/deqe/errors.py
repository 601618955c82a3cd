"""Exception types shared across the toolkit.

Anything the CLI should report as a data problem (exit code 2) derives from
DataError; UsageError maps to exit code 1. Other exceptions are bugs and are
left to surface as tracebacks.
"""


class DeqeError(Exception):
    """Base class for all toolkit errors."""


class UsageError(DeqeError):
    """Bad command-line invocation (missing/contradictory flags)."""

    def __init__(self, message: str, usage: str = ""):
        super().__init__(message)
        self.usage = usage


class DataError(DeqeError):
    """Input data violates a contract (alignment, encoding, file format)."""


class AlignmentError(DataError):
    """Parallel files disagree on line count."""


class EncodingError(DataError):
    """A file is not valid UTF-8."""


class WcmFormatError(DataError):
    """A serialized co-occurrence matrix is malformed or truncated."""


class VocabularyMismatchError(DataError):
    """A token fed to the matrix builder is absent from its vocabulary."""


class UndefinedCorrelationError(DataError):
    """Pearson correlation is undefined (a constant input vector)."""
