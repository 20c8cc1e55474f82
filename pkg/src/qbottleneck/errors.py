"""Exception hierarchy shared by all modules."""


class QIBError(Exception):
    """Base class for library errors."""


class NotHermitianError(QIBError, ValueError):
    pass


class DomainError(QIBError, ValueError):
    """A matrix function was asked for values outside its domain."""


class InvalidStateError(QIBError, ValueError):
    pass


class NotCompletelyPositiveError(QIBError, ValueError):
    pass


class DegenerateInstanceError(QIBError, ValueError):
    """The input carries no correlation (I(X;Y) = 0), so the rate is undefined."""


class InfeasibleError(QIBError):
    """No channel meeting the relevance constraint was found."""

    def __init__(self, message, reason="budget_exhausted", best=None):
        super().__init__(message)
        self.reason = reason
        self.best = best
