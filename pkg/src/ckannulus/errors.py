"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the region where a quantity is defined."""


class SlowConvergenceError(ArithmeticError):
    """A truncated series/product could not reach the requested accuracy.

    ``achieved_bound`` holds the best relative-error bound reached before
    the term budget ran out.
    """

    def __init__(self, message, achieved_bound=float("nan"), terms=0):
        super().__init__(message)
        self.achieved_bound = achieved_bound
        self.terms = terms


class QuadratureError(ArithmeticError):
    """Quadrature refinement failed to stabilise."""


class VerificationFailure(AssertionError):
    """A verification report came out false; carries the offending numbers."""

    def __init__(self, message, **numbers):
        super().__init__(message)
        self.numbers = numbers
