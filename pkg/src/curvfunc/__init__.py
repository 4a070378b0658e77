"""Quadratic curvature functionals on homogeneous model geometries.

Curvature algebra, model geometries (spheres, products, left-invariant
metrics on SU(2)), functional values, Euler-Lagrange residuals, rigidity
inequalities and a critical-point solver for finite-dimensional families.
"""

__version__ = "0.1.0"

from .errors import (
    ConventionError,
    InvalidInput,
    NoncompactError,
    PreconditionError,
    ReductionMismatchError,
)
from .tolerances import TOL, Tolerances

__all__ = [
    "ConventionError", "InvalidInput", "NoncompactError", "PreconditionError",
    "ReductionMismatchError", "TOL", "Tolerances",
]
