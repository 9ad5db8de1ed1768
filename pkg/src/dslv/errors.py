"""Exception hierarchy shared by every dslv module."""


class DSLVError(Exception):
    """Base class for all library errors."""


class DomainError(DSLVError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class IndexRangeError(DSLVError, IndexError):
    """A lattice index falls outside the range a function is defined on."""


class DegenerateLambdaError(DomainError):
    """lambda*(lambda - 4) vanishes, so the characteristic roots coincide."""


class NumericalFailure(DSLVError, ArithmeticError):
    """A computation produced a result that violates its numerical contract."""


class BracketError(NumericalFailure):
    """Shooting could not isolate one sign change per eigenvalue."""
