"""Exception hierarchy shared by the solver, analysis and CLI layers."""


class CTRWError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for this failure."""

    exit_code = 1
    kind = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def record(self):
        return {"error": self.kind, "message": str(self), "details": self.details}


class ConfigurationError(CTRWError, ValueError):
    exit_code = 2
    kind = "configuration"


class InvalidParameter(ConfigurationError):
    kind = "invalid-parameter"


class InvalidState(CTRWError):
    exit_code = 2
    kind = "invalid-state"


class NumericalFailure(CTRWError, ArithmeticError):
    exit_code = 3
    kind = "numerical"


class ConvergenceFailure(NumericalFailure):
    kind = "convergence"


class VerificationFailure(CTRWError, AssertionError):
    exit_code = 1
    kind = "verification"
