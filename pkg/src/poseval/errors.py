"""Exception hierarchy shared by every poseval module."""

from __future__ import annotations


class PosevalError(Exception):
    """Base class for all errors raised by poseval."""


class ParseError(PosevalError):
    """A structural file could not be parsed.

    ``line`` is the 1-based line number of the offending record when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyStructureError(ParseError):
    pass


class UnsupportedFormatError(ParseError):
    pass


class UnsupportedTokenError(ParseError):
    pass


class UnknownElementError(PosevalError):
    def __init__(self, element: str, what: str = "element"):
        self.element = element
        super().__init__(f"unsupported {what}: {element!r}")


class MappingError(PosevalError):
    """No label-preserving atom mapping exists between two graphs."""


class MappingPreconditionError(MappingError):
    """Graphs differ in heavy-atom count or element multiset."""


class SearchBudgetExceeded(PosevalError):
    """A combinatorial search hit its node budget."""


class GeometryError(PosevalError):
    pass


class PocketError(PosevalError):
    pass


class ManifestError(PosevalError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field {field!r}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ConfigError(PosevalError):
    """Invalid configuration file or override."""


class AggregationError(PosevalError):
    """Nothing left to aggregate (for example every complex was excluded)."""
