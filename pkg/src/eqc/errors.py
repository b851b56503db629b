"""Exception hierarchy shared across the package."""


class EqcError(Exception):
    """Base class for all package errors."""


class DomainError(EqcError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class FitError(EqcError):
    """A model could not be fitted on the given data (e.g. an empty class)."""


class ParseError(EqcError):
    """A file could not be parsed; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TuningError(EqcError):
    """Cross-validation could not produce a usable tuning result."""
