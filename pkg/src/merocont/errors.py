"""Exception hierarchy.

Every failure the library raises derives from :class:`MeroContError` so that
callers (and the CLI) can map it to an exit status in one place.
"""


class MeroContError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class CapacityExceeded(MeroContError):
    """An enumeration or coefficient grew past its configured cap."""

    exit_code = 4


class BracketInvalid(MeroContError):
    """``invert_monotone`` was given a bracket that does not contain the target."""


class EvaluationFailed(MeroContError):
    """A user function raised or returned a non-finite value during quadrature."""

    exit_code = 3


class DomainError(MeroContError):
    """An argument lies outside the domain where the operation is defined."""

    exit_code = 3


class NearPole(DomainError):
    """Evaluation point lies inside the exclusion disk of a (predicted) pole."""

    def __init__(self, message, location=None, shift=None):
        super().__init__(message)
        self.location = location
        self.shift = shift


class BranchViolation(DomainError):
    """``1 + h(c_n)`` lies on the principal branch cut (-inf, 0]."""


class TruncationUnavailable(MeroContError):
    """The perturbation expansion has too few terms for the requested half-plane."""

    exit_code = 3


class AccuracyUnreachable(MeroContError):
    """Truncation caps were hit before the requested tolerance was met."""

    exit_code = 2


class ScanExceeded(MeroContError):
    """No index satisfied the scan condition below the scan limit."""

    exit_code = 4


class InvalidPerturbation(MeroContError):
    """Constructor preconditions for a perturbed series failed."""
