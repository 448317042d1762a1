"""Exception types shared across the package."""


class HoroLabError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(HoroLabError):
    """Operands live in Minkowski spaces of different dimension."""


class SingularPoint(HoroLabError):
    """The first fundamental form degenerates at the requested point."""

    def __init__(self, message, min_eig=None):
        super().__init__(message)
        self.min_eig = min_eig


class TauNotFound(HoroLabError):
    """The dilation scan exhausted its range without certifying regularity."""

    def __init__(self, message, max_abs_lambda=None):
        super().__init__(message)
        self.max_abs_lambda = max_abs_lambda


class ZeroEigenvalue(HoroLabError):
    """A Schouten eigenvalue is too close to zero to invert."""


class FlowNotRegular(HoroLabError):
    """The parallel flow hits a forbidden curvature value."""


class NotStronglyConvex(HoroLabError):
    """Contact radii require all principal curvatures below -1."""


class DomainViolation(HoroLabError):
    """Argument lies outside the domain of the requested transform or cone."""


class SolveFailed(HoroLabError):
    """The nonlinear solve did not converge and a converged one is required."""


class ConfigError(HoroLabError):
    """Malformed configuration or input file."""
