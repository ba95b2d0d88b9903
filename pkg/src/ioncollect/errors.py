"""Exception hierarchy shared by all modules."""


class IonCollectError(Exception):
    """Base class for all package errors."""


class SolverError(IonCollectError):
    """An iterative solver did not converge.

    ``residual`` holds the last residual norm reached.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class IntegrationError(IonCollectError):
    """Adaptive quadrature failed to reach the requested accuracy."""

    def __init__(self, message, estimate=float("nan"), error=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class EmptyRangeError(IonCollectError, ValueError):
    """The feasible length-scale interval is empty."""


class DegenerateNormalizationError(IonCollectError, ValueError):
    """Single-ion rate does not exceed the background rate."""


class UnidentifiableFitError(IonCollectError, ValueError):
    """The model trace carries no information about the coherent fraction."""


class ConfigError(IonCollectError, ValueError):
    """Invalid run configuration.

    ``key`` names the offending entry; ``line``/``column`` are set for
    syntax errors (1-based).
    """

    def __init__(self, message, key=None, line=None, column=None):
        super().__init__(message)
        self.key = key
        self.line = line
        self.column = column
