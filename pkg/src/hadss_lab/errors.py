"""Exception hierarchy shared by every module of the toolkit."""


class HadssError(Exception):
    """Base class for all toolkit errors."""


class DomainError(HadssError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class IntegrationError(HadssError, RuntimeError):
    """The warping ODE integration left the admissible region (u <= 0)."""


class ConfigError(HadssError, ValueError):
    """Invalid resolution or run configuration."""


class GeometryError(HadssError, ValueError):
    """The surface is degenerate (non positive-definite induced metric)."""


class SolverError(HadssError, RuntimeError):
    """An iterative eigensolver failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ContractError(HadssError, ValueError):
    """Inputs violate an operation's contract (missing data, bad sampling)."""


class PreconditionError(HadssError, ValueError):
    """A precondition on the base surface does not hold."""
