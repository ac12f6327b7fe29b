"""Exception hierarchy.

Input problems derive from :class:`ValidationError`; failures that only show
up once numbers are crunched (divergence, singular resolvents, ...) derive
from :class:`NumericalError`.  The CLI maps the two families to distinct
exit codes.
"""


class QRationalError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QRationalError, ValueError):
    """Malformed or inconsistent input."""


class DimensionError(ValidationError):
    """Matrix shapes do not chain together."""


class NumericalError(QRationalError):
    """A computation could not be completed reliably."""


class DomainError(NumericalError, ValueError):
    """Argument lies outside the region where a series/product converges."""


class ConvergenceError(NumericalError):
    """Truncation criterion not met within the configured term cap."""


class SingularityError(NumericalError):
    """A matrix that must be inverted is singular within tolerance."""


class DegenerateProblemError(SingularityError):
    """Pick matrix is only positive semidefinite (boundary case)."""


class RankWarning(RuntimeWarning):
    """Singular spectrum has no clear gap at the requested tolerance."""


class InsufficientDataError(ValidationError):
    """Too few Taylor coefficients to pin down a realization."""


class IdentityResidualWarning(RuntimeWarning):
    """A structural identity of a constructed object holds only loosely."""
