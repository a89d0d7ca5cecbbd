"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InsufficientDataError(ValueError):
    """Too few P values for the requested estimator."""
