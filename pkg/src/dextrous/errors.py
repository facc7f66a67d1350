"""Exception types raised across the package."""

from __future__ import annotations


class DextrousError(Exception):
    """Base class for every error raised by this package."""


class DivisionByZeroInterval(DextrousError, ZeroDivisionError):
    """Interval division where the divisor contains zero."""


class EmptyDomain(DextrousError, ValueError):
    """A function was applied to an interval lying entirely outside its domain."""


class EmptyIntervalError(DextrousError, ValueError):
    """Arithmetic was attempted on the empty interval."""


class DegenerateAxis(DextrousError, ValueError):
    """Bisection requested along an axis of zero width."""


class OutsideReachableDomain(DextrousError, ValueError):
    """A pose (or a whole box) lies outside the intersection of the leg cylinders."""


class SingularConfiguration(DextrousError, ArithmeticError):
    """The parallel Jacobian is numerically singular at the requested pose."""


class InvalidGeometry(DextrousError, ValueError):
    """Machine parameters violate the model invariants (e.g. R - r >= L)."""


class BudgetExhausted(DextrousError, RuntimeError):
    """A box-count cap was reached before the search finished.

    ``partial`` carries the best result found so far.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
