"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """Raised when an iterative solve runs out of iterations.

    Carries the best iterate found and its residual norm so callers can
    inspect or resume.
    """

    def __init__(self, message, best=None, residual_norm=float("nan"), index=None):
        super().__init__(message)
        self.best = best
        self.residual_norm = residual_norm
        self.index = index


class NumericalError(ArithmeticError):
    """NaN or overflow encountered while evaluating the model."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class IdentifiabilityWarning(UserWarning):
    """Calibration data leaves some stiffness poorly determined."""
