"""Exception hierarchy shared across the package."""


class PJDetectError(Exception):
    """Base class for all package errors."""


class ConfigError(PJDetectError, ValueError):
    """Invalid configuration or parameter value."""


class ShapeError(PJDetectError, ValueError):
    """Operand shapes are incompatible."""


class NumericalError(PJDetectError, ArithmeticError):
    """A numerical kernel could not produce a valid result."""


class NotPositiveDefiniteError(NumericalError):
    """Cholesky factorization failed: the matrix is not Hermitian positive definite."""


class ZeroDiagonalError(NumericalError):
    """The Gram matrix has a zero on its diagonal, so D^-1 does not exist."""


class EnumerationCapError(PJDetectError, ValueError):
    """Exhaustive search space J**N exceeds the configured cap."""
