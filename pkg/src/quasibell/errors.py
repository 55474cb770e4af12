"""Exception types raised across the package."""


class QuasiBellError(ValueError):
    """Base class for invalid-input errors."""


class NonUnitDirection(QuasiBellError):
    pass


class BlochOutOfBall(QuasiBellError):
    pass


class OutOfRange(QuasiBellError):
    pass


class WrongArity(QuasiBellError):
    pass


class InconsistentMarginals(QuasiBellError):
    pass


class TooManyFactors(QuasiBellError):
    pass


class StepOutOfRange(QuasiBellError):
    pass


class IndexOutOfRange(QuasiBellError):
    pass


class EnumerationTooLarge(QuasiBellError):
    pass


class NoViolation(QuasiBellError):
    pass


class BudgetExhausted(RuntimeError):
    """Optimizer ran out of evaluations; ``result`` holds the best-so-far."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
