"""Exception hierarchy shared across the package."""


class OzemuError(Exception):
    """Base class for every error raised by ozemu."""


class InvalidParamsError(OzemuError, ValueError):
    """A parameter is outside its documented domain."""


class InvalidDimError(InvalidParamsError):
    """A matrix dimension is too small for the requested generator."""


class NonFiniteEntryError(OzemuError, ValueError):
    """An input matrix contains NaN or infinity."""


class ShapeMismatchError(OzemuError, ValueError):
    """Operand shapes are incompatible."""


class NonSquareError(ShapeMismatchError):
    """A square matrix was required."""


class AccumulatorOverflowError(OzemuError):
    """The requested shape cannot be accumulated exactly in the integer unit."""


class SingularPivotError(OzemuError, ArithmeticError):
    """An exactly zero pivot column was encountered."""


class NonPowerOfTwoScaleError(InvalidParamsError):
    """Diagonal scaling entries must be (signed) powers of two."""


class InvalidPermutationError(InvalidParamsError):
    """An index vector is not a permutation of 0..n-1."""
