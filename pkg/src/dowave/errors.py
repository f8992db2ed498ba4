"""Exception types shared across the solver."""


class DowaveError(Exception):
    """Base class for all library errors."""


class InvalidProblemError(DowaveError):
    """Problem data violates a contract (non-positive weight, bad domain, ...)."""


class InvalidDiscretizationError(DowaveError):
    """Grid/step counts violate a contract (M < 2, N < 1, K < 1, ...)."""


class SingularSystemError(DowaveError):
    """A zero pivot was met while eliminating a tridiagonal or dense system."""


class SolverError(DowaveError):
    """A time step failed; carries the 1-based step index that aborted."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


class OracleSizeError(DowaveError):
    """A dense oracle was asked for a system above its size guard."""


class OracleFailureError(DowaveError):
    """An adaptive oracle did not converge within its refinement cap."""


class UndefinedOrderError(DowaveError):
    """Observed order is undefined (non-positive error or ratio <= 1)."""


class ConfigError(DowaveError):
    """A CLI configuration file is malformed; message names the offending key."""
