"""Exception hierarchy shared by all qcu modules."""


class QcuError(Exception):
    """Base class for every error raised by qcu."""


class ValidationError(QcuError, ValueError):
    """Input violates a documented precondition."""


class ShapeError(ValidationError):
    """Matrix has the wrong shape for the requested operation."""


class SizeLimitError(ValidationError):
    """Problem exceeds a hard size cap."""


class UnsupportedPhaseError(ValidationError):
    """A global phase that the three-parameter scheme cannot realise."""


class NumericalError(QcuError):
    """A numerical procedure failed to produce an acceptable answer."""


class NoFeasiblePointError(NumericalError):
    """No restart reached the feasibility threshold."""

    def __init__(self, message, best_residual):
        super().__init__(message)
        self.best_residual = best_residual


class InsufficientDataError(NumericalError):
    """Tomographic data carries no information (e.g. all counts zero)."""
