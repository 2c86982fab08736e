"""Exception hierarchy with stable machine-readable codes.

Every error the library raises carries a short ``code`` string so that the
CLI (and external harnesses) can assert on failures without parsing prose.
Codes are frozen; messages are free-form.
"""


class SqfError(Exception):
    """Base class; ``code`` is a stable identifier."""

    code = "error"

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context

    def record(self):
        return {"code": self.code, "message": str(self), **self.context}


class ParameterError(SqfError):
    """Invalid model or run configuration (CLI exit code 2)."""

    code = "invalid_parameter"


class StabilityError(ParameterError):
    code = "instability"


class NumericError(SqfError):
    """Numerical failure in the analytic pipeline (CLI exit code 3)."""

    code = "numeric_failure"


class KernelPoleError(NumericError):
    code = "pole_of_kernel"


class CutIntervalError(NumericError):
    code = "cut_interval"


class PoleError(NumericError):
    code = "pole"


class RootOrderingError(NumericError):
    code = "root_ordering"


class RootCountError(NumericError):
    code = "root_count"


class RootDomainError(NumericError):
    """Argument left of the tracked-root interval (real branch point)."""

    code = "root_domain"


class SingularMatrixError(NumericError):
    code = "singular_step_matrix"


class SeriesDivergenceError(NumericError):
    code = "series_divergence"


class AnalyticityDomainError(NumericError):
    """Evaluation outside the case-dependent analyticity half-plane."""

    code = "outside_analyticity_domain"


class ExtrapolationError(NumericError):
    code = "extrapolation_instability"


class KernelZeroError(NumericError):
    """Evaluation too close to a kernel zero for a stable quotient."""

    code = "kernel_zero"


class InversionError(NumericError):
    code = "inversion_bracket"


class ValidationFailure(SqfError):
    """Analytic/simulation disagreement beyond tolerance (CLI exit code 4)."""

    code = "validation_failure"
