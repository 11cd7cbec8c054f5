"""Exception hierarchy shared by all specjac modules."""

from __future__ import annotations


class SpecjacError(Exception):
    """Base class for all library errors."""


class DomainError(SpecjacError):
    """Parameters outside the admissible (N, n) or index domain."""


class ZeroPolynomial(SpecjacError):
    """Root finding requested on a (numerically) zero polynomial."""


class NoConvergence(SpecjacError):
    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class NonSquare(SpecjacError):
    """Determinant of a non-square matrix."""


class NotDivisible(SpecjacError):
    """Exact polynomial division left a nonzero remainder."""


class DegreeViolation(SpecjacError):
    """A polynomial exceeded the degree bound its shape prescribes."""


class SingularGauge(SpecjacError):
    """The gauge matrix s is singular; the instance is non-generic."""


class ShapeMismatch(SpecjacError):
    """A compiled bracket produced a monomial outside the coefficient shape."""


class DimensionMismatch(SpecjacError):
    """Gradients or vectors of incompatible length."""


class IndexOutOfRange(SpecjacError):
    """Coefficient or derivation index outside its admissible range."""


class MultipleRoot(SpecjacError):
    """det Z(z) has a (numerically) repeated root; resample the instance."""


class GenericityFailure(SpecjacError):
    """No admissible xi vector found; the stacked matrix is rank deficient."""


class DegenerateLeading(SpecjacError):
    """Leading coefficient of det Z vanishes; the instance is non-generic."""


class ThetaDivisorSingularity(SpecjacError):
    """The divisor evaluation system is singular: the point lies on (or too
    close to) the theta divisor."""


class SweepInconsistency(SpecjacError):
    """A stage of the triangular reconstruction sweep has no solution."""


class InconsistentCurve(SpecjacError):
    """First-column recovery could not match the prescribed curve."""


class UnbalancedCharacter(SpecjacError):
    def __init__(self, message, count_difference=0):
        super().__init__(message)
        self.count_difference = count_difference


class DivisionByZeroChi(SpecjacError):
    """Euler-characteristic ratio with vanishing denominator."""


class ToleranceFailure(SpecjacError):
    """A numerical check exceeded its stated tolerance."""
