"""Exception hierarchy shared by every wicksys module."""


class WickSysError(Exception):
    """Base class for all library errors."""


class MathError(WickSysError):
    """A mathematically ill-posed request (non-unit, divergent sum, ...)."""

    kind = "MathError"


class NotInvertible(MathError):
    kind = "NotInvertible"


class CompositionDomain(MathError):
    kind = "CompositionDomain"


class DivergentConstant(MathError):
    kind = "DivergentConstant"


class DivergentWeightSum(MathError):
    kind = "DivergentWeightSum"


class SingularAtPoint(MathError):
    kind = "SingularAtPoint"

    def __init__(self, message, abs_det):
        super().__init__(message)
        self.abs_det = abs_det


class InvalidRecursion(MathError):
    kind = "InvalidRecursion"

    def __init__(self, message, column=None, coefficient=None):
        super().__init__(message)
        self.column = column
        self.coefficient = coefficient


class SpecMismatch(WickSysError, ValueError):
    """Operands live under different truncations."""


class DimensionMismatch(WickSysError, ValueError):
    """Matrix or signal shapes are incompatible."""


class ResourceLimit(WickSysError):
    """An enumeration would exceed the configured size cap."""
