"""Exception hierarchy shared by all solver and verification modules."""


class NumeraireError(Exception):
    """Base class for all errors raised by this package."""


class DomainMismatch(NumeraireError):
    """A function is undefined (NaN or raises) on part of a measure's support."""


class AccuracyNotMet(NumeraireError):
    """Quadrature could not reach the requested accuracy within its budget."""

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class InvalidMeasure(NumeraireError):
    """Masses or densities violate the measure invariants."""


class UnsupportedNull(NumeraireError):
    """The requested operation is not computable for this null hypothesis variant."""


class NotConverged(NumeraireError):
    """An iterative solver hit its iteration budget.

    The last iterate and its residuals are attached so callers can inspect
    or resume.
    """

    def __init__(self, message, iterate=None, residuals=None, iterations=0):
        super().__init__(message)
        self.iterate = iterate
        self.residuals = residuals
        self.iterations = iterations


class NoCommonReference(NumeraireError):
    """Alternative and null components cannot be put on a common reference measure."""


class NotAbsolutelyContinuous(NumeraireError):
    """The alternative charges a region that the null (or point null) does not."""


class InstanceTooLarge(NumeraireError):
    """Brute-force oracles refuse instances beyond their enumeration limits."""


class BracketFailure(NumeraireError):
    """The first-order condition does not change sign on the search bracket."""


class PreconditionViolated(NumeraireError):
    """An input violates a documented precondition (e.g. parameter ordering)."""


class SpecError(NumeraireError):
    """A problem, measure or null description is malformed."""


class UnknownPreset(SpecError):
    """No preset with the given name exists."""
