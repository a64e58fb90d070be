"""Exception types shared across the package."""

from .special_functions import DomainError

__all__ = ["DomainError", "NumericalError", "KernelUnderflowError"]


class NumericalError(ArithmeticError):
    """A numerical method failed to reach its target accuracy."""


class KernelUnderflowError(NumericalError):
    """The kernel at the evaluation point is below the representable floor."""
