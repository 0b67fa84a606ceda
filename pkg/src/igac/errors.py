"""Exception types shared across the package."""


class IgacError(Exception):
    """Base class for all package errors."""


class DomainError(IgacError):
    """A micro-variable lies outside the support of its density."""


class UnsupportedFamilyError(IgacError):
    """No closed-form expression exists for the requested family."""


class QuadratureAccuracyError(IgacError):
    """Quadrature failed to converge below the requested tolerance.

    The best available estimate is attached as ``estimate``.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateMetricError(IgacError):
    """Metric is singular or not positive definite at the evaluation point."""


class DegeneratePlaneError(IgacError):
    """Sectional curvature requested for a (near-)degenerate 2-plane."""


class ChartBoundaryError(IgacError):
    """A trajectory left the open parameter chart (scale coordinate -> 0).

    ``last_state`` holds the last valid (tau, theta, theta_dot) triple.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class StiffnessError(IgacError):
    """Adaptive step size underflowed during integration."""


class BvpFailureError(IgacError):
    """Shooting iteration for a boundary value problem did not converge.

    ``best_residual`` carries the smallest endpoint mismatch reached.
    """

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class UndefinedRateError(IgacError):
    """Growth-rate estimate requested for an identically degenerate trace."""


class UndefinedEntropyError(IgacError):
    """log of a non-positive complexity value."""


class InfeasibleConstraintError(IgacError):
    """Moment constraint incompatible with the prior (divergent tilt)."""


class BracketingError(IgacError):
    """Root bracketing failed: no sign change on the expanded interval."""


class FitFailureError(IgacError):
    """Least-squares design matrix is rank deficient or the fit diverged."""


class RegimeError(IgacError):
    """Input parameters violate a validity bound of the modeled regime."""


class ConfigError(IgacError):
    """One or more configuration fields failed validation.

    ``failures`` is a list of (path, message) pairs covering every problem
    found, not just the first.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        lines = "; ".join(f"{path}: {msg}" for path, msg in self.failures)
        super().__init__(f"invalid configuration: {lines}")
