"""Exception hierarchy shared by the library and the CLI."""


class HSFCError(Exception):
    """Base class for all errors raised by hsfc."""

    exit_code = 1


class CatalogError(HSFCError, ValueError):
    """Malformed catalog spec string or unknown builtin name."""

    exit_code = 1


class PreconditionError(HSFCError, ValueError):
    """An operation was called outside its documented preconditions."""

    exit_code = 2


class DomainError(PreconditionError):
    """A half-line jet was evaluated below zero."""


class OrderError(PreconditionError):
    """A derivative order beyond a jet's ``max_order`` was requested."""


class SingularResolventError(PreconditionError):
    """``zI - H`` is singular or too ill-conditioned to invert reliably."""


class GrowthError(PreconditionError):
    """No resolvent growth estimate in the fitted range matches the samples."""


class QuadratureError(HSFCError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    exit_code = 3


class DivergenceError(QuadratureError):
    """The integrand tail does not decay, so the integral diverges."""
