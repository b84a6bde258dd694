"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class TwoNormError(Exception):
    """Base class for all errors raised by twonorm."""


class DimensionError(TwoNormError, ValueError):
    """Vectors or spaces of incompatible dimension were combined."""


class InvalidNormError(TwoNormError):
    """A 2-norm evaluator produced a value that is not a valid norm value."""


class InvalidAnchorError(TwoNormError, ValueError):
    """The anchor pair of a derived norm is linearly dependent."""


class InvalidToleranceError(TwoNormError, ValueError):
    """A tolerance, radius or window is not strictly positive / well formed."""


class BoundViolationError(TwoNormError):
    """A sequence term exceeds the declared bound of its set."""


class DslError(TwoNormError):
    """Base class for errors of the expression language."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class LexError(DslError):
    pass


class ParseError(DslError):
    def __init__(self, message: str, offset: int | None = None, expected: frozenset[str] = frozenset()):
        self.expected = frozenset(expected)
        if expected:
            message = f"{message}; expected one of: {', '.join(sorted(expected))}"
        super().__init__(message, offset)


class EvalError(DslError):
    pass


class ConfigError(TwoNormError):
    """Invalid run configuration. ``problems`` holds ``(field, message)`` pairs."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = list(problems)
        lines = [f"{path}: {msg}" for path, msg in self.problems]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))
