"""Exception types shared across the package."""


class AbelsheafError(Exception):
    """Base class for library errors."""


class FieldMismatch(AbelsheafError):
    """Operands live in different fields (or rings) without an embedding."""


class InsufficientPrecision(AbelsheafError):
    """A result depends on coefficients that are not certified at the working precision."""

    def __init__(self, message, precision=None):
        super().__init__(message)
        self.precision = precision


class ValidationFailure(AbelsheafError):
    """Input data violates a structural condition; ``report`` carries details."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MalformedInput(AbelsheafError):
    """Input document does not match the expected schema."""
