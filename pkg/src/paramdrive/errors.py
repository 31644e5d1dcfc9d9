"""Exception hierarchy."""


class ParamDriveError(Exception):
    """Base class for all package errors."""


class PreconditionError(ParamDriveError, ValueError):
    """Input violates an operation's precondition (flatness, grid coverage, ...)."""


class DomainError(ParamDriveError, ValueError):
    """Argument outside the mathematical domain of a function."""


class OutOfRangeError(ParamDriveError, ValueError):
    """Evaluation point outside a sampled range."""


class InconsistencyError(ParamDriveError):
    """A derived quantity fails an identity it must satisfy."""


class ConfigError(ParamDriveError, ValueError):
    """Invalid scenario configuration."""


class ConvergenceError(ParamDriveError):
    """A numerical procedure did not reach its tolerance.

    ``estimate`` carries the achieved error estimate.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
