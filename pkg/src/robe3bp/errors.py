"""Exception hierarchy shared by every module."""


class Robe3bpError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(Robe3bpError, ValueError):
    """An input lies outside the domain of the model."""


class NumericalError(Robe3bpError):
    """A numerical procedure could not produce a trustworthy result."""


class SingularityError(NumericalError, ArithmeticError):
    """Evaluation point coincides with the point-mass primary (r2 = 0)."""


class NoSignChangeError(NumericalError):
    """A root bracket does not straddle a sign change."""


class ConvergenceError(NumericalError):
    """An iterative method exhausted its iteration budget."""


class NoRealRootError(NumericalError):
    """A quadratic condition has no real solution."""


class StepUnderflowError(NumericalError):
    """The adaptive integrator step fell below the minimum allowed size."""
