"""Exception hierarchy shared by every module."""


class QGeomError(Exception):
    """Base class for all errors raised by qgeom."""


class NotHermitian(QGeomError, ValueError):
    pass


class DomainError(QGeomError, ValueError):
    """A function was evaluated outside its domain (e.g. log of a negative eigenvalue)."""


class DimensionMismatch(QGeomError, ValueError):
    pass


class LengthMismatch(QGeomError, ValueError):
    pass


class OutsideBall(QGeomError, ValueError):
    pass


class TraceNotOne(QGeomError, ValueError):
    pass


class InvalidState(QGeomError, ValueError):
    """Matrix fails one of the density-matrix conditions."""


class RangeError(QGeomError, ValueError):
    pass


class NotPure(DomainError):
    pass


class NotOnSphere(DomainError):
    pass


class SingularSecondArgument(DomainError):
    """Second argument of the divergence is not full rank."""


class NotCompletelyPositive(QGeomError, ValueError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            f"channel is not completely positive: minimum Choi eigenvalue {self.min_eigenvalue:.3e}"
        )


class NotTracePreserving(QGeomError, ValueError):
    pass


class DidNotConverge(QGeomError, RuntimeError):
    """Iterative estimator hit its iteration cap; ``best`` holds the best iterate found."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best
