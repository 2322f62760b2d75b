"""Exception types raised across the package."""

__all__ = [
    "AffineDRError",
    "DegenerateCase",
    "EmptySum",
    "MaxIterExceeded",
    "NoConvergence",
    "NoFixedPoint",
    "NoSolution",
    "NotMaximal",
    "NotMonotone",
    "NotSymmetric",
    "ParseError",
    "PreconditionViolated",
    "SingularMatrix",
    "WrongBranch",
    "WrongSize",
]


class AffineDRError(Exception):
    """Base class for all package errors."""


class SingularMatrix(AffineDRError, ArithmeticError):
    """A matrix that must be inverted is (numerically) singular."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NotSymmetric(AffineDRError, ValueError):
    pass


class WrongSize(AffineDRError, ValueError):
    pass


class WrongBranch(AffineDRError, ValueError):
    """The requested inverse formula does not apply to these parameters."""


class DegenerateCase(AffineDRError, ValueError):
    pass


class NotMonotone(AffineDRError, ValueError):
    pass


class NotMaximal(AffineDRError, ValueError):
    """The resolvent of a relation is not defined everywhere or not unique."""


class PreconditionViolated(AffineDRError, ValueError):
    def __init__(self, message, precondition):
        super().__init__(message)
        self.precondition = precondition


class EmptySum(AffineDRError):
    """The domains of two relations do not meet."""


class NoFixedPoint(AffineDRError):
    pass


class NoSolution(AffineDRError):
    """The primal solution set Z is empty."""


class NoConvergence(AffineDRError):
    pass


class MaxIterExceeded(AffineDRError):
    """Iteration budget exhausted; ``best`` holds the last iterate."""

    def __init__(self, message, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace


class ParseError(AffineDRError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
