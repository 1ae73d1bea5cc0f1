"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`SplineBoundsError`,
which is itself a :class:`ValueError` so callers validating input can catch either.
"""


class SplineBoundsError(ValueError):
    """Base class for all package errors."""


class InvalidDomainError(SplineBoundsError):
    pass


class InvalidSmoothnessError(SplineBoundsError):
    pass


class OutOfDomainError(SplineBoundsError):
    pass


class DegreeTooHighError(SplineBoundsError):
    pass


class NonconformingOrderError(SplineBoundsError):
    pass


class MissingDerivativeError(SplineBoundsError):
    pass


class NotPositiveDefiniteError(SplineBoundsError):
    """Cholesky factorization hit a nonpositive pivot.

    ``pivot`` is the zero-based index of the offending leading minor.
    """

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"matrix not positive definite (pivot {pivot})")


class SingularSystemError(SplineBoundsError):
    pass


class EmptySpaceError(SplineBoundsError):
    pass


class InvalidDataError(SplineBoundsError):
    pass


class ParameterError(SplineBoundsError):
    """A constant or bound was requested outside its validity range.

    ``reason`` is a short machine-readable name of the violated precondition.
    """

    def __init__(self, reason: str, message: str | None = None):
        self.reason = reason
        super().__init__(message or reason)


class ResolutionError(SplineBoundsError):
    pass


class DegenerateMapError(SplineBoundsError):
    pass


class InvalidMultipatchError(SplineBoundsError):
    pass


class ConfigError(SplineBoundsError):
    pass
