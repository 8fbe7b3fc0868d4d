"""Exception hierarchy shared across the package."""


class TrustDynError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(TrustDynError, ValueError):
    """An argument is malformed, non-finite, or out of its allowed domain."""


class ValidationError(InvalidArgumentError):
    """An input file or record fails schema or range validation.

    ``location`` names the offending field path or row when known.
    """

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class NumericalError(TrustDynError, ArithmeticError):
    """Base class for numerical failures."""


class NumericalDegeneracyError(NumericalError):
    """A covariance that must be invertible is singular."""


class NonConvergenceError(NumericalError):
    """An iteration hit its cap before meeting its tolerance."""


class DegenerateDesignError(NumericalError):
    """A regression design matrix is rank deficient."""
