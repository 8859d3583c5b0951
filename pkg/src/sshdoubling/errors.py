"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class AdmissibilityError(DomainError):
    """A parameter set gives complex couplings or breaks Favard positivity."""


class ZeroDenominatorError(ZeroDivisionError):
    """A denominator factor vanishes."""


class DivergenceError(ArithmeticError):
    """An infinite product does not converge."""


class ConvergenceError(ArithmeticError):
    """An iterative solver ran out of its iteration budget.

    ``interval`` holds the bracket that failed to shrink, when known.
    """

    def __init__(self, msg, interval=None):
        super().__init__(msg)
        self.interval = interval
