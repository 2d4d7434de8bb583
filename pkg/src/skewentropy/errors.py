"""Semantic exception hierarchy.

Public functions never raise bare ValueError for contract violations; they
raise one of the classes below so callers (and the CLI) can distinguish
input/validation failures from numerical failures.
"""


class SkewEntropyError(Exception):
    """Base class for all errors raised by this package."""


class NotSymmetric(SkewEntropyError):
    """Matrix expected to be symmetric is not (beyond tolerance)."""


class NotPositiveDefinite(SkewEntropyError):
    """Cholesky factorization hit a pivot at or below the admissible minimum.

    Attributes
    ----------
    pivot_index : int
        Index of the offending pivot.
    pivot : float
        Value of the offending pivot.
    """

    def __init__(self, message, pivot_index=None, pivot=None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.pivot = pivot


class DimensionMismatch(SkewEntropyError):
    """Operands have incompatible shapes."""


class OutOfSupport(SkewEntropyError):
    """Density evaluation point lies outside the family's support."""


class Unsupported(SkewEntropyError):
    """Operation is not defined for this family (e.g. closed-form mean of a
    log family)."""


class InvalidPartition(SkewEntropyError):
    """Block sizes do not form a valid two-block partition of the vector."""


class MismatchedLocationScale(SkewEntropyError):
    """Two specs that must share location and scale do not."""


class DimensionTooLarge(SkewEntropyError):
    """Quadrature oracle asked for a dimension it does not support."""


class NonConvergent(SkewEntropyError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class SupportMismatch(SkewEntropyError):
    """KL divergence between densities with different supports."""


class SpecFileError(SkewEntropyError):
    """Parameter/spec file failed to parse or validate.

    Attributes
    ----------
    line : int or None
        1-based line number in the offending file, when known.
    """

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
