"""Exception types shared across the package."""


class ManikernError(Exception):
    """Base class for all package-specific errors."""


class DomainError(ManikernError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class SingularConfigurationError(ManikernError, ValueError):
    """A point configuration contains coincident points."""


class ConditioningError(ManikernError):
    """A Gram system could not be factorized.

    Attributes
    ----------
    pivot : int or None
        Zero-based index of the first non-positive Cholesky pivot, when known.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class ConfigurationError(ManikernError, ValueError):
    """A run configuration is invalid (bad keys, disconnected graph, ...)."""


class NormalizationError(ManikernError, ZeroDivisionError):
    """A relative error was requested against an identically-zero reference."""


class ParseError(ManikernError, ValueError):
    """An input file could not be parsed.

    Attributes
    ----------
    line : int or None
        One-based line number of the offending line, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
