"""Exception hierarchy shared by all modules.

Every degenerate configuration (collision, rectilinear limit, chart antipode)
raises a typed error instead of silently returning NaN.
"""


class TricenterError(Exception):
    """Base class for all errors raised by the package."""


class DomainError(TricenterError, ValueError):
    """Input lies outside the domain on which an operation is defined."""


class SingularityError(TricenterError, ArithmeticError):
    """Evaluation point coincides (numerically) with a singularity."""


class ChartSingularError(SingularityError):
    """Point lies on the boundary or antipode of a local chart."""


class CollisionError(SingularityError):
    """An integration approached one of the centers.

    Attributes
    ----------
    t : float
        Time at which the collision was detected.
    """

    def __init__(self, message, t):
        super().__init__(message)
        self.t = t


class NumericalError(TricenterError, RuntimeError):
    """An iterative or adaptive numerical procedure failed."""
