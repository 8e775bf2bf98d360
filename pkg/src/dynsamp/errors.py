"""Exception hierarchy shared by all modules."""


class DynSampError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DynSampError, ValueError):
    """Invalid parameters or malformed configuration."""


class NumericalError(DynSampError):
    """A numerical precondition failed at run time."""


class ConvergenceError(NumericalError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class RankDeficiencyError(NumericalError):
    pass


class DegenerateFrequencyError(NumericalError):
    """Raised when a generic-xi estimator is asked to run at xi in {0, 1/2}."""

    def __init__(self, message, xi=None):
        super().__init__(message)
        self.xi = xi


class NodeCollisionError(NumericalError):
    pass


class InsufficientSamplesError(NumericalError):
    pass
