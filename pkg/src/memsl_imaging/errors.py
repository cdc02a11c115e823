"""Exception hierarchy shared by every module of the package."""


class ImagingError(Exception):
    """Base class for all errors raised by this package."""


class NumericalError(ImagingError, ArithmeticError):
    """A numerical routine could not deliver a trustworthy result."""


class UnderflowOrder(NumericalError):
    """Requested order has an eigenvalue below the representable floor."""

    def __init__(self, message: str, largest_safe_order: int):
        super().__init__(message)
        self.largest_safe_order = largest_safe_order


class NonConvergence(NumericalError):
    pass


class EigenvalueUnderflow(NumericalError):
    pass


class OrderOutOfRange(ImagingError, IndexError):
    pass


class BasisTooSmall(ImagingError, ValueError):
    pass


class DomainError(ImagingError, ValueError):
    pass


class NonPositiveParameter(DomainError):
    pass


class ProtocolMismatch(ImagingError, ValueError):
    pass


class GridTooCoarse(ImagingError, ValueError):
    pass


class GridTooNarrow(ImagingError, ValueError):
    pass


class InsufficientPhotons(DomainError):
    """The photon budget does not support even the lowest order."""


class SmallPhaseViolation(UserWarning):
    """Issued (not raised) when the small-phase sufficient condition fails."""
