"""Exception hierarchy shared by every msrate module."""


class MSRateError(Exception):
    """Base class for all errors raised by msrate."""


class NumericalFailure(MSRateError):
    """An iterative kernel hit its iteration cap without converging."""


class NotPositiveDefinite(MSRateError):
    """A matrix that must be positive definite is not (to tolerance)."""


class NotPSD(MSRateError):
    """A matrix that must be positive semidefinite has a negative eigenvalue."""


class DimensionMismatch(MSRateError, ValueError):
    """Matrix shapes are inconsistent with each other or the declared n, m."""


class ParseError(MSRateError, ValueError):
    """A configuration or gain file could not be parsed."""


class InvalidSigma(MSRateError, ValueError):
    """The noise standard deviation is not strictly positive."""


class Degenerate(MSRateError):
    """The stacked input matrix [B; sigma*B_bar] is rank deficient."""


class DegenerateTrace(MSRateError):
    """The trace used for normalization is not strictly positive."""


class ConfigError(MSRateError, ValueError):
    """Solver or sweep parameters violate their preconditions."""


class NoConvergedStage(MSRateError):
    """No stage of a continuation run converged, so no bound can be certified."""


class OracleNonConvergence(MSRateError):
    """Power iteration for the closed-loop rate did not settle within the cap."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class NonPositiveEnergy(MSRateError, ValueError):
    """A log-energy fit was requested over a window with non-positive energies."""
