"""Exception types shared across the solver modules."""


class GridShapeError(ValueError):
    """Field dimensions do not match the grid they claim to live on."""


class UnsolvableConstraintError(ValueError):
    """Neumann compatibility violated: the Poisson source has nonzero mean.

    For the gauge constraint this signals a state whose total charge does
    not vanish (an unnormalized density).
    """


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations.

    Carries the last residual (and, for self-consistent loops, a short
    iteration trace) so callers can report something actionable.
    """

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace or []


class IntegratorError(RuntimeError):
    """Time integration lost a conserved quantity beyond tolerance."""


class ConstraintViolationError(RuntimeError):
    """The Gauss constraint residual blew up along a trajectory."""


class InsufficientDataError(ValueError):
    """Not enough snapshots to evaluate a time-discretized quantity."""
