"""Exception types shared across the package."""


class SpcaError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(SpcaError, ValueError):
    """A parameter lies outside the domain of an operation."""


class InvalidMoveError(SpcaError, ValueError):
    """A swap move does not respect the current support."""


class EnumerationTooLargeError(SpcaError):
    """Exhaustive enumeration would exceed the configured budget."""

    def __init__(self, count, budget):
        self.count = count
        self.budget = budget
        super().__init__(f"enumeration of {count} supports exceeds budget {budget}")


class UndefinedDepthError(SpcaError):
    """The free-energy-well depth is undefined (empty region)."""


class ZeroMassError(SpcaError):
    """A region carries no Gibbs mass and cannot be sampled."""
