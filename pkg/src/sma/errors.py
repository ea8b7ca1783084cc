"""Exception types shared across the package."""


class SmaError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(SmaError):
    """A caller violated a precondition (bad parameter, length mismatch, ...)."""


class CapacityExceededError(SmaError):
    """An exact computation was requested beyond its configured budget."""


class NumericError(SmaError):
    """A numerical routine failed to reach its accuracy target."""


class SearchFailure(SmaError):
    """A randomized search exhausted its attempt budget.

    Carries the size of the best partial solution so callers can tell
    "parameters are infeasible" apart from "bad luck, retry".
    """

    def __init__(self, message, placed=0, attempts=0):
        super().__init__(message)
        self.placed = placed
        self.attempts = attempts
