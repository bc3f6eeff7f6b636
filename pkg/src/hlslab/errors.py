"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class SingularityError(DomainError):
    """A kernel was requested exactly at a non-integrable singular point."""


class UsageError(ValueError):
    """Arguments are individually valid but cannot be combined."""


class NearManifoldError(ArithmeticError):
    """The input is too close to the extremal family for a ratio to be formed.

    The deficit is still available on the ``deficit`` attribute.
    """

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class OptimizerError(RuntimeError):
    """A maximization or minimization produced no usable value."""
