"""Exception and warning classes raised by :mod:`xxchain`."""


class XXChainError(Exception):
    """Base class for all library errors."""


class NonPositiveCoupling(XXChainError, ValueError):
    pass


class LengthMismatch(XXChainError, ValueError):
    pass


class NonMonotoneDual(XXChainError, ValueError):
    pass


class ConvergenceFailure(XXChainError, RuntimeError):
    pass


class IndexOutOfRange(XXChainError, IndexError):
    pass


class DegenerateSpectrum(XXChainError, ValueError):
    pass


class NegativeJSquared(XXChainError, ValueError):
    """A recurrence coefficient J^2 came out non-positive during synthesis."""

    def __init__(self, index, value):
        super().__init__(f"J^2 = {value!r} <= 0 at coupling index {index}")
        self.index = index
        self.value = value


class ConditioningFailure(XXChainError, RuntimeError):
    pass


class NonPositiveSpectrum(XXChainError, ValueError):
    """Bose-Einstein occupations need every one-body energy to be > 0."""


class NotMirrorSymmetric(XXChainError, ValueError):
    pass


class GradientTooLarge(XXChainError, ValueError):
    pass


class MissingDualGrid(XXChainError, ValueError):
    pass


class NotCommuting(XXChainError, ValueError):
    pass


class NoConvergence(XXChainError, RuntimeError):
    def __init__(self, message, best=None, residuals=None):
        super().__init__(message)
        self.best = best
        self.residuals = residuals


class SingularResolvent(XXChainError, ArithmeticError):
    pass


class ImaginaryLeak(XXChainError, ArithmeticError):
    pass


class InsufficientPoints(XXChainError, ValueError):
    pass


class DegenerateT(UserWarning):
    """Heun operator spectrum too clustered; fell back to diagonalizing C."""
