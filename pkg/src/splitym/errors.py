"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """Input lies outside the set where an operation is defined."""


class OutOfChartError(DomainError):
    """A plane or point is not covered by the requested chart or transition."""


class SingularSeedError(DomainError):
    """A t'Hooft seed vanishes (or a field is singular) at an evaluated point."""


class DegenerateDataError(DomainError):
    """ADHM data fails the maximal-rank condition at an evaluated point."""


class ChargeAccuracyError(RuntimeError):
    """Quadrature did not reach the requested tolerance within its budget.

    The best available estimate is kept on ``partial`` and its error
    estimate on ``error``.
    """

    def __init__(self, message: str, partial: float, error: float):
        super().__init__(message)
        self.partial = partial
        self.error = error
