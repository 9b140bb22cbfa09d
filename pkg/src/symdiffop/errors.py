"""Exception types shared across the package."""


class ArityError(ValueError):
    """An indeterminate needed for evaluation was not supplied."""


class ParseError(ValueError):
    """Syntax error in polynomial or operator-file text."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class SymmetryError(ValueError):
    """Operation requires a symmetric operator."""


class OrderError(ValueError):
    """Operator order violates a precondition (e.g. odd order)."""


class DegreeError(ValueError):
    """Polynomial degrees violate a precondition."""


class PositivityError(ValueError):
    """A quantity that must be strictly positive is not."""


class NonRealError(ValueError):
    """Quantization produced a residual imaginary part."""


class NormalizationError(ValueError):
    """Quantization produced a residual half-integer power of sqrt(2)."""


class NumericError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""
