"""Exception types raised by the solver suite."""


class GtrsError(Exception):
    """Base class for all package errors."""


class NonSquare(GtrsError, ValueError):
    pass


class NotSymmetric(GtrsError, ValueError):
    pass


class DimensionMismatch(GtrsError, ValueError):
    pass


class SingularA(GtrsError):
    pass


class ChainTooComplex(GtrsError):
    pass


class PreconditionViolated(GtrsError):
    pass


class OddLinearTermNonzero(GtrsError):
    """A 2x2 block carries a nonzero odd linear coefficient (problem is unbounded)."""


class LiftingFailed(GtrsError):
    pass


class RecoveryInconsistent(GtrsError):
    pass


class EmptyInterval(GtrsError, ValueError):
    pass


class NotApplicable(GtrsError):
    def __init__(self, assumption, message=""):
        self.assumption = assumption
        super().__init__(f"{assumption}: {message}" if message else assumption)


class DimensionTooLarge(GtrsError, ValueError):
    pass


class ParseError(GtrsError, ValueError):
    pass
