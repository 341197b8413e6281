"""Exception hierarchy shared by the kernels, the bound evaluators and the CLI."""


class RandRankError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(RandRankError, ValueError):
    """Dimension mismatch, bad block index, empty input."""


class InputError(RandRankError, ValueError):
    """Non-finite or otherwise unusable numeric input."""


class DomainError(RandRankError, ValueError):
    """Argument outside the domain where a formula is valid."""


class ConstraintError(RandRankError, ValueError):
    """A requested spectrum that cannot be realized."""


class NumericalError(RandRankError, ArithmeticError):
    """Base for failures that depend on the numbers, not the shapes."""


class SingularMatrixError(NumericalError):
    """A triangular pivot (or chain factor) is zero or numerically negligible.

    ``index`` is the offending diagonal position, or the chain position
    when raised from the product factorization.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConvergenceError(NumericalError):
    """An iteration hit its cap; ``measure`` carries the residual it stalled at."""

    def __init__(self, message, measure=None):
        super().__init__(message)
        self.measure = measure
