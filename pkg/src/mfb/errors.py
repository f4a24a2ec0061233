"""Exception types raised by the simulator."""


class DomainError(ValueError):
    """A parameter lies outside the model's domain (e.g. beta < 1, F >= 1/2)."""


class DegenerateChannelError(ArithmeticError):
    """The channel matrix is too close to rank deficient for zero-forcing."""

    def __init__(self, message, mask=None):
        super().__init__(message)
        self.mask = mask


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ResourceError(RuntimeError):
    """A request would exceed a fixed resource guard (e.g. RVQ codebook size)."""
