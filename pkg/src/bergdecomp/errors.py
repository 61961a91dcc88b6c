"""Exception hierarchy shared by the library and the CLI."""


class BergdecompError(Exception):
    """Base class for all package errors."""


class SingularMatrixError(BergdecompError, ValueError):
    """An integer matrix that must be invertible has zero determinant."""


class DimensionError(BergdecompError, ValueError):
    """Vector or matrix sizes do not match."""


class GroupTooLargeError(BergdecompError):
    """|det A| exceeds the configured enumeration cap."""


class DomainError(BergdecompError, ValueError):
    """A point lies where an operation is undefined (axes, outside a domain)."""


class ValidityError(DomainError):
    """A kernel was evaluated outside the region where its truncation is certified."""

    def __init__(self, message, region=None):
        super().__init__(message)
        self.region = region


class TruncationError(BergdecompError):
    """The series tail bound could not be met within the maximum degree."""


class QuadratureError(BergdecompError):
    """Successive quadrature refinements failed to agree."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ScenarioError(BergdecompError, ValueError):
    """A scenario file could not be parsed or validated."""
