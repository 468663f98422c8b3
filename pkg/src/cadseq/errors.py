"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class CadError(Exception):
    """Base class for all domain errors raised by cadseq."""


class InvalidModel(CadError):
    """A model failed validation; carries the violation report."""

    def __init__(self, violations):
        self.violations = list(violations)
        first = self.violations[0] if self.violations else None
        detail = f"{first.path}: {first.message}" if first else "invalid model"
        super().__init__(detail)


class ParseError(CadError):
    """A text representation could not be parsed.

    kind is one of "lexical", "syntactic", "semantic"; line and column are
    1-based and point at the first offending token where known.
    """

    def __init__(self, message: str, line: int = 1, column: int = 1, kind: str = "syntactic"):
        self.message = message
        self.line = line
        self.column = column
        self.kind = kind
        super().__init__(f"{kind} error at {line}:{column}: {message}")


class OutOfRange(CadError):
    """A coordinate lies outside the quantization grid box."""


class EmptyGeometry(CadError):
    """Execution produced no boundary (empty or degenerate solid)."""


class DegenerateExtent(CadError):
    """A bounding box has zero diagonal."""


class EmptyCloud(CadError):
    """A point-cloud operation received an empty cloud."""


class EmptyEditSet(CadError):
    """Localized evaluation was asked to score an empty edit script."""


class IndexOutOfBounds(CadError):
    """An edit action referenced an op or loop index that does not exist."""


class StaleOldValue(CadError):
    """A ModifyParam action's recorded old value no longer matches the model."""


class InvalidResult(CadError):
    """Applying an edit script produced a model that fails validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        first = self.violations[0] if self.violations else None
        detail = f"{first.path}: {first.message}" if first else "invalid result"
        super().__init__(detail)


class NonInvertible(CadError):
    """An edit script cannot be inverted against the given base model."""


class NothingRemovable(CadError):
    """Pair generation found no removable op or hole loop."""


class InvalidTarget(CadError):
    """The reward target model failed validation."""


class ClientUnavailable(CadError):
    """The external completion endpoint is not configured or unreachable."""


class ClientTimeout(CadError):
    """The external completion endpoint timed out."""


class MalformedResponse(CadError):
    """The external completion endpoint returned an unusable payload."""
