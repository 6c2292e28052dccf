"""Exception types shared across the package."""


class TwoPointError(Exception):
    """Base class for all package errors."""


class DomainError(TwoPointError, ValueError):
    """An argument lies outside the domain of the operation."""


class CapacityError(TwoPointError):
    """A graph or oracle size limit was exceeded."""


class BracketError(TwoPointError):
    """Bisection bracket does not contain a sign change."""

    def __init__(self, msg, lo=None, hi=None, f_lo=None, f_hi=None):
        super().__init__(msg)
        self.lo, self.hi = lo, hi
        self.f_lo, self.f_hi = f_lo, f_hi


class ScanRangeError(TwoPointError):
    """A k-scan exhausted its range without finding the threshold."""

    def __init__(self, msg, k_max=None):
        super().__init__(msg)
        self.k_max = k_max


class ValidationError(TwoPointError, ValueError):
    """Configuration or input validation failed."""
