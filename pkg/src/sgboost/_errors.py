class SGBError(Exception):
    """Base class for all errors raised by sgboost."""


class ValidationError(SGBError, ValueError):
    """Invalid input: shapes, labels, ranges or non-finite values."""


class NumericalError(SGBError, ArithmeticError):
    """A numerical routine failed to reach its required accuracy."""
