"""Exception hierarchy."""


class MpnumError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(MpnumError, ValueError):
    pass


class NotAMatrix(MpnumError, ValueError):
    pass


class IndexOutOfRange(MpnumError, IndexError):
    pass


class EmptyArray(MpnumError, ValueError):
    pass


class PrecisionMismatch(MpnumError, ValueError):
    pass


class InvalidParam(MpnumError, ValueError):
    pass


class UnknownOperation(MpnumError, LookupError):
    pass


class BackendUnavailable(MpnumError, RuntimeError):
    pass


class NumericalError(MpnumError, ArithmeticError):
    """A factorization or iteration failed for numerical reasons."""


class NotPositiveDefinite(NumericalError):
    def __init__(self, column, message=None):
        self.column = column
        super().__init__(
            message
            or f"matrix is not positive definite: pivot of column {column} (0-based) is not positive"
        )


class SingularMatrix(NumericalError):
    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"matrix is singular: zero pivot in column {column} (0-based)")


class NoConvergence(NumericalError):
    pass
