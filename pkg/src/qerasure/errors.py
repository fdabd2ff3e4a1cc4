"""Exception types raised across the package."""


class ErasureError(ValueError):
    """Base class for all domain errors."""


class NonSquare(ErasureError):
    pass


class NotHermitian(ErasureError):
    pass


class NotPsd(ErasureError):
    pass


class UnsupportedOrder(ErasureError):
    pass


class WrongDimension(ErasureError):
    pass


class WrongAccessibleDimension(WrongDimension):
    pass


class DimensionMismatch(ErasureError):
    pass


class NoConvergence(ArithmeticError):
    """An iterative solver exhausted its iteration budget."""


class EmptyKeepSet(ErasureError):
    pass


class NegligibleProbability(ErasureError):
    """Conditioning event has probability below the floor.

    The probability itself is kept on ``probability`` so callers can still
    report it.
    """

    def __init__(self, probability, floor):
        super().__init__(f"probability {probability:.3e} <= floor {floor:.1e}")
        self.probability = probability
        self.floor = floor


class InvalidPom(ErasureError):
    pass


class InvalidState(ErasureError):
    pass


class DegenerateDraw(ArithmeticError):
    pass


class UnsupportedK(ErasureError):
    pass


class InsufficientPoints(ErasureError):
    pass


class ProductState(ErasureError):
    pass
