"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class SingularityError(DomainError):
    """Evaluation at a point where a derivative is infinite."""


class QuadratureError(RuntimeError):
    """Numerical integration did not reach the requested tolerance."""


class StencilError(DomainError):
    """A finite-difference stencil would leave the function's domain."""


class ToleranceExceeded(AssertionError):
    """A comparison exceeded its tolerance. Carries the offending report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InequalityViolation(RuntimeError):
    """A verified inequality failed. Carries the worst margin and where it occurred."""

    def __init__(self, message, margin, location):
        super().__init__(f"{message} (margin={margin:.6e} at {location})")
        self.margin = margin
        self.location = location


class InvariantViolation(AssertionError):
    """An internal invariant failed; indicates a formula bug."""


class FlowBlowUp(RuntimeError):
    """The lapse ODE lost positivity or blew up."""
