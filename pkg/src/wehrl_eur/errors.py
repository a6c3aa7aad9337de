class WehrlEURError(Exception):
    """Base class for errors raised by this package."""


class StructureError(WehrlEURError, ValueError):
    """Shapes, labels or partitions do not fit together."""


class DomainError(WehrlEURError, ValueError):
    """A scalar argument lies outside the domain of the operation."""


class PhysicalityError(WehrlEURError, ValueError):
    """A covariance matrix or density operator violates the uncertainty principle / positivity."""


class NumericalError(WehrlEURError, ArithmeticError):
    """A decomposition failed numerically (e.g. singular covariance)."""


class PreconditionError(WehrlEURError, ValueError):
    """An input does not satisfy the documented precondition of a checker."""
