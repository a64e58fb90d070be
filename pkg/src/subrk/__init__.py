"""Heat kernels on SU(2), CR spheres and Heisenberg groups, with their small-time limits."""

from .errors import DomainError, KernelUnderflowError, NumericalError
from .heisenberg import HeisenbergParams, h_derivs, h_kernel
from .lie_words import Letter, LieWord, beta_map, parse_word
from .operator_algebra import ComplexPoint, CylPoint, hermite, hermite_detail
from .subelliptic import QuadratureConfig, SubellipticPoint, p_block, p_sphere, p_su2

__all__ = [
    "DomainError",
    "NumericalError",
    "KernelUnderflowError",
    "HeisenbergParams",
    "h_kernel",
    "h_derivs",
    "Letter",
    "LieWord",
    "beta_map",
    "parse_word",
    "CylPoint",
    "ComplexPoint",
    "hermite",
    "hermite_detail",
    "QuadratureConfig",
    "SubellipticPoint",
    "p_block",
    "p_su2",
    "p_sphere",
]
