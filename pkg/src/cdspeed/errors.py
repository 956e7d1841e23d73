"""Exception types raised by the library."""


class CDSpeedError(Exception):
    """Base class for all library errors."""


class NotHermitian(CDSpeedError, ValueError):
    pass


class DimensionMismatch(CDSpeedError, ValueError):
    pass


class EigenNonConvergence(CDSpeedError, ArithmeticError):
    def __init__(self, sweeps, off_norm):
        super().__init__(
            f"Jacobi iteration did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {off_norm:.3e})"
        )
        self.sweeps = sweeps
        self.off_norm = off_norm


class DegenerateSpectrum(CDSpeedError, ArithmeticError):
    """Raised when an eigenvalue gap is too small to divide by."""

    def __init__(self, gap, threshold, t=None):
        where = "" if t is None else f" at t={t!r}"
        super().__init__(f"spectral gap {gap:.3e} below {threshold:.3e}{where}")
        self.gap = gap
        self.threshold = threshold
        self.t = t


class BranchMistracking(CDSpeedError, ArithmeticError):
    pass


class PopulationBoundary(CDSpeedError, ValueError):
    pass


class InvalidState(CDSpeedError, ValueError):
    pass


class NormDrift(CDSpeedError, ArithmeticError):
    def __init__(self, drift, step):
        super().__init__(f"norm drift {drift:.3e} at step {step}; reduce the step size")
        self.drift = drift
        self.step = step


class StepTooCoarse(CDSpeedError, ValueError):
    pass


class OutOfSpan(CDSpeedError, ValueError):
    pass
