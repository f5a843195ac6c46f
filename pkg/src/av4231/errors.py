"""Exception hierarchy shared by the library and the command line."""


class Av4231Error(Exception):
    """Base class for every error raised by this package."""


class ValidationError(Av4231Error, ValueError):
    """Malformed permutation, word, lock sequence or numeric argument."""


class InvalidLetter(ValidationError):
    pass


class IncompleteEvolution(ValidationError):
    pass


class DisallowedLetter(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonNegativityViolation(ValidationError):
    pass


class ZeroStart(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class ResourceLimit(Av4231Error):
    """The requested computation would exceed a configured budget."""


class NotConverged(Av4231Error):
    """Power iteration stopped at ``max_iter`` before reaching ``tol``.

    The best estimate is attached; its bracket is still a rigorous pair of
    bounds on the dominant eigenvalue.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate
