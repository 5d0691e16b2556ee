"""Exception types shared across the solver stack."""


class AccelProxError(Exception):
    """Base class for all library errors."""


class ParameterError(AccelProxError):
    """A scalar or structural parameter is outside its admissible range."""


class DataError(AccelProxError):
    """Problem data is malformed (shape mismatch, bad labels, ...)."""


class CapabilityError(AccelProxError):
    """The requested operation needs structure the problem does not expose."""


class SolverFailure(AccelProxError):
    """An inner solve exhausted its budget without meeting its certificate.

    Carries diagnostics so callers can report the best residual seen.
    """

    def __init__(self, message: str, *, best_ratio: float | None = None,
                 iterations: int | None = None):
        super().__init__(message)
        self.best_ratio = best_ratio
        self.iterations = iterations


class LineSearchFailure(AccelProxError):
    """The step-size search could not place the residual inside its window."""

    def __init__(self, message: str, *, lam_lo: float | None = None,
                 lam_hi: float | None = None, evaluations: int | None = None,
                 reason: str = ""):
        super().__init__(message)
        self.lam_lo = lam_lo
        self.lam_hi = lam_hi
        self.evaluations = evaluations
        self.reason = reason


class StepError(AccelProxError):
    """A completed step violated an internal consistency check."""
