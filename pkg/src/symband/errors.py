"""Exception types raised across the package."""


class SymbandError(Exception):
    """Base class for all library errors."""


class BandStructureError(SymbandError, IndexError):
    """A write or read addressed an entry outside the stored band."""


class SingularConversionError(SymbandError, ZeroDivisionError):
    """An upper-triangular conversion has a zero diagonal entry."""


class BreakdownError(SymbandError, ArithmeticError):
    """An unpivoted factorization met an exactly zero pivot."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotPositiveDefiniteError(SymbandError, ArithmeticError):
    """A Cholesky-type factorization found a non-positive pivot."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class UnsupportedOperatorError(SymbandError, NotImplementedError):
    """No banded formula exists for the requested basis pair."""


class PathologicalBoundaryError(SymbandError, ArithmeticError):
    """The standard annihilator system is singular or badly conditioned."""

    def __init__(self, message, column=None, condition=None):
        super().__init__(message)
        self.column = column
        self.condition = condition


class InfeasibleBoundaryError(SymbandError, ArithmeticError):
    """The least-norm annihilator column leaves a large residual."""

    def __init__(self, message, column=None, residual=None):
        super().__init__(message)
        self.column = column
        self.residual = residual


class NotSelfAdjointError(SymbandError, ArithmeticError):
    """The assembled left matrix is not symmetric and banded."""

    def __init__(self, message, symmetry_defect, band_defect):
        super().__init__(message)
        self.symmetry_defect = symmetry_defect
        self.band_defect = band_defect


class NotSkewAdjointError(SymbandError, ArithmeticError):
    """The assembled first-order matrix is not skew-symmetric."""

    def __init__(self, message, skew_defect):
        super().__init__(message)
        self.skew_defect = skew_defect


class IterationLimitError(SymbandError, RuntimeError):
    """An iteration did not converge within its budget."""


class WindowCapError(SymbandError, RuntimeError):
    """An adaptive deflation window grew beyond the caller's cap."""


class PencilConditioningError(SymbandError, ArithmeticError):
    """The Cholesky embed of the second operator broke down."""


class SpectralDomainError(SymbandError, ValueError):
    """A spectral function was applied outside its domain."""


class SpecValidationError(SymbandError, ValueError):
    """A problem specification failed validation."""
