"""Exception taxonomy shared across the package.

Every error raised on purpose derives from LoftError so callers (the CLI,
the pipeline) can map failures to exit codes without enumerating modules.
"""

from __future__ import annotations


class LoftError(Exception):
    """Base class for all package errors."""


class ParseError(LoftError):
    """Logic-form text could not be parsed.

    ``offset`` is the character offset of the problem, or None when the
    error is not tied to a single location (e.g. programmatic construction).
    """

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class UnknownFunctionError(ParseError):
    """A function name not present in the catalog."""


class ArityError(ParseError):
    """A function applied to the wrong number of arguments."""


class TypeCheckError(LoftError):
    """A parsed form does not fit the table schema.

    kind is one of: unknown_column, type_mismatch, bad_ordinal.
    """

    def __init__(self, message: str, kind: str = "type_mismatch"):
        super().__init__(message)
        self.kind = kind


class ExecutionError(LoftError):
    """Base class for typed runtime failures of the executor."""

    kind = "execution"


class EmptyViewError(ExecutionError):
    """Aggregation or ordinal over a view with no usable values."""

    kind = "empty_view"


class RankRangeError(ExecutionError):
    """Ordinal rank outside the usable value multiset."""

    kind = "rank_range"


class NonNumericError(ExecutionError):
    """Numeric comparison or arithmetic over a non-numeric operand."""

    kind = "non_numeric"


class ViewSizeError(ExecutionError):
    """Row lookup (hop) over a view that does not hold exactly one row."""

    kind = "view_size"


class IngestError(LoftError):
    """Corpus file could not be loaded."""


class DistributionError(LoftError):
    """Template distribution file is malformed or inconsistent."""


class HookError(LoftError):
    """External hook process could not be launched or died mid-batch."""
