"""
Exception hierarchy shared by every app.

Two families map onto the process exit codes of the management commands:
ValidationFailure (bad input, exit code 2) and NumericalFailure (a
computation that could not finish, exit code 3).
"""

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ZRPError(Exception):
    """Base class for all errors raised by the simulator."""
    exit_code = 1
    stage = None

    def with_stage(self, stage):
        """Tag the error with the pipeline stage it escaped from."""
        self.stage = stage
        return self

    def __str__(self):
        message = super().__str__()
        if self.stage:
            return f"[{self.stage}] {message}"
        return message


# ============================================================================
# VALIDATION FAILURES
# ============================================================================

class ValidationFailure(ZRPError):
    exit_code = EXIT_VALIDATION


class InvalidSizeError(ValidationFailure):
    pass


class InvalidParameterError(ValidationFailure):
    pass


class EnvironmentValidationError(ValidationFailure):
    """Raised when an operation needs a valid environment and gets another."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvalidWindowError(ValidationFailure):
    pass


class DensityRangeError(ValidationFailure):
    pass


class ConfigurationError(ValidationFailure):
    pass


class ReportInputError(ValidationFailure):
    pass


class NormalizationError(ValidationFailure):
    pass


class DomainError(ValidationFailure):
    pass


class MisuseError(ValidationFailure):
    pass


class StateSpaceError(ValidationFailure):
    pass


# ============================================================================
# NUMERICAL FAILURES
# ============================================================================

class NumericalFailure(ZRPError):
    exit_code = EXIT_NUMERICAL


class DivergenceError(NumericalFailure):
    pass


class SolverError(NumericalFailure):
    """Newton iteration did not converge; `diagnostics` holds the history."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SingularityError(NumericalFailure):
    pass


class ConservationError(NumericalFailure):
    pass
