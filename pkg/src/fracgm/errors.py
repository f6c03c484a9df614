"""Exception hierarchy.

Input-validation failures derive from :class:`InvalidInputError` (CLI exit
code 2); everything else raised by the numerics derives from
:class:`NumericalError` (CLI exit code 1).
"""


class FGMError(Exception):
    """Base class for all package errors."""

    kind = "error"

    def record(self):
        return {"error": self.kind, "message": str(self)}


class InvalidInputError(FGMError, ValueError):
    kind = "invalid-input"


class InvalidFieldError(InvalidInputError):
    kind = "invalid-field"


class InvalidParameterError(InvalidInputError):
    kind = "invalid-parameter"


class DomainError(InvalidInputError):
    kind = "domain-error"


class IncompatibleGridError(InvalidInputError):
    kind = "incompatible-grid"


class SingularConfigurationError(InvalidInputError):
    kind = "singular-configuration"


class NumericalError(FGMError, RuntimeError):
    kind = "numerical-failure"


class FitDomainError(NumericalError):
    kind = "fit-domain"


class AccuracyError(NumericalError):
    kind = "accuracy"

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class ConvergenceError(NumericalError):
    kind = "convergence"

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class DivergenceError(ConvergenceError):
    kind = "divergence"


class SymmetryError(NumericalError):
    kind = "symmetry"


class TruncationError(NumericalError):
    kind = "truncation"


class InhibitorPositivityError(NumericalError):
    kind = "inhibitor-positivity"


class CalibrationError(NumericalError):
    kind = "calibration"


class NoInteriorMinimumError(NumericalError):
    kind = "no-interior-minimum"
