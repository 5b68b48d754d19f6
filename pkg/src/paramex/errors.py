"""Exception hierarchy.

Two families matter to callers: input problems (bad files, bad shapes,
syntax) and certification failures, which carry the name of the condition
that could not be verified. The CLI maps the first to exit status 1 and
the second to exit status 2.
"""

from __future__ import annotations


class ParamexError(Exception):
    """Base class for all library errors."""


class DomainError(ParamexError, ArithmeticError):
    """An operation left its mathematical domain (e.g. 0 in a denominator)."""


class ShapeError(ParamexError, ValueError):
    """Operands with non-conforming dimensions."""


class ParseError(ParamexError, ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class ProblemError(ParamexError, ValueError):
    """A problem file is structurally invalid."""


class CertificationFailed(ParamexError):
    """A verification step could not establish its condition.

    ``condition`` is a short machine-readable name, ``details`` holds
    whatever partial quantities were computed before the failure.
    """

    condition = "certification"

    def __init__(self, message: str, *, condition: str | None = None, details: dict | None = None):
        super().__init__(message)
        if condition is not None:
            self.condition = condition
        self.details = dict(details or {})


class SingularJacobianError(CertificationFailed):
    condition = "regular_jacobian"


class NewtonFailed(CertificationFailed):
    condition = "newton_convergence"

    def __init__(self, message: str, result=None, **kw):
        super().__init__(message, **kw)
        self.result = result


class NonpositiveDiscriminant(CertificationFailed):
    condition = "discriminant_positivity"

    def __init__(self, component: int, message: str | None = None, **kw):
        super().__init__(message or f"discriminant of component {component} is not positive", **kw)
        self.component = component


class NegativeInnerDiscriminant(CertificationFailed):
    condition = "inner_discriminant"

    def __init__(self, component: int, **kw):
        super().__init__(f"beta^2 - alpha^2 gamma < 0 in component {component}", **kw)
        self.component = component


class LambdaOrderViolation(CertificationFailed):
    condition = "lambda_order"


class InclusionLeavesDomain(CertificationFailed):
    condition = "inclusion_feasibility"


class ApproxLeavesDomain(CertificationFailed):
    condition = "approx_in_domain"


class NoFeasibleEta(LambdaOrderViolation):
    pass


class NoFeasibleSigma(InclusionLeavesDomain):
    pass
