"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Vector or matrix sizes do not match an operator/block contract."""


class NumericsError(RuntimeError):
    """A non-finite quantity appeared where the algorithm requires finite values.

    The message names the offending quantity so traces can be debugged.
    """


class ConvergenceError(RuntimeError):
    """An iterative routine failed to converge within its iteration budget.

    ``last_estimate`` carries the best value available when the budget ran out.
    """

    def __init__(self, message, last_estimate=None):
        super().__init__(message)
        self.last_estimate = last_estimate


class ConfigError(ValueError):
    """A run configuration is malformed; the message names the offending key."""


class ParseError(ValueError):
    """A data file is malformed; the message carries the 1-based line number."""
