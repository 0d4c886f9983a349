"""Exceptions raised by heightlab."""


class HeightlabError(Exception):
    """Base class for all heightlab errors."""


class DomainError(HeightlabError, ValueError):
    """Raised when an input lies outside the domain of an operation."""


class NumericalFailure(HeightlabError, ArithmeticError):
    """Raised when an iteration fails to converge or produces non-finite
    values.

    Args:
        msg (str): Description of the failure.
        residual (float, optional): The residual (or norm) at the point of
            failure, if one is available.
    """

    def __init__(self, msg: str, residual: float | None = None):
        super().__init__(msg)
        self.residual = residual


class ConsistencyError(NumericalFailure):
    """Raised when a propagated vector comes out exactly zero. The semigroup
    is injective, so this means h(t) underflowed."""
