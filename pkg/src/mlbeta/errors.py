"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the supported domain of an operation."""


class EvaluationOverflowError(OverflowError):
    """The exact result exceeds the double-precision floating range."""
