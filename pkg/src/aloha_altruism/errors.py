"""Exception types shared across the package."""


class AlohaGameError(Exception):
    """Base class for errors raised by this package."""


class DomainError(AlohaGameError, ValueError):
    """A profile lies where the requested quantity is undefined (e.g. log of zero)."""


class NoRoot(AlohaGameError):
    """No sign change of the symmetric condition was found on the scan grid."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotConverged(AlohaGameError):
    """An iterative solver hit its iteration budget.

    ``last`` carries the final iterate so callers can inspect it.
    """

    def __init__(self, message, last=None, change=None, iterations=None):
        super().__init__(message)
        self.last = last
        self.change = change
        self.iterations = iterations


class HeterogeneousPlayers(AlohaGameError, ValueError):
    pass


class NonSymmetric(AlohaGameError, ValueError):
    pass
