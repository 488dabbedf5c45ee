"""Exception hierarchy shared by all gradcat modules."""


class GradcatError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(GradcatError, ValueError):
    """Non-finite entries, malformed grids and similar bad arguments."""


class WrongCaseError(GradcatError, ValueError):
    """A criterion was called outside the spectral case it covers."""


class NumericalFailure(GradcatError, ArithmeticError):
    """An iterative procedure did not converge."""


class BlowupCrossedError(GradcatError, ArithmeticError):
    """The decisive function vanished before the requested time."""

    def __init__(self, t_star, message=None):
        self.t_star = t_star
        super().__init__(message or f"decisive function vanishes at t*={t_star!r}")


class SingularLocusError(GradcatError, ValueError):
    """A first integral was evaluated on one of its excluded lines."""

    def __init__(self, line, message=None):
        self.line = line
        super().__init__(message or f"point lies on the singular line {line}")


class OutsideBranchError(GradcatError, ValueError):
    """Negative radicand in the simple-wave gradient formula."""


class GradientSingularity(GradcatError, ArithmeticError):
    """Zero denominator in the simple-wave gradient formula."""


class UnsupportedSpecialization(GradcatError, ValueError):
    """The requested shortcut exists only for a subset of models."""


class NotApplicableError(GradcatError, ValueError):
    """The operation only makes sense for globally smooth solutions."""
