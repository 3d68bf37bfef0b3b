"""Exception types shared across the package."""


class RegionError(ValueError):
    """The point lies outside the region where the requested method is valid."""


class BudgetError(RuntimeError):
    """The requested tolerance cannot be met within the configured cost ceiling.

    ``best`` carries the best result obtained before giving up, if any.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
