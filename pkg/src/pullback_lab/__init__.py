"""Numerical lab for moduli-space endomorphisms of postcritically finite
polynomials: portrait validation, fixed-point solving, covering-family
verification, decomposition certificates, and basin rendering."""

__version__ = "0.1.0"

from .polyarith import INF, ComplexPoly, RationalMap, chordal, is_inf
from .portrait import MarkedPoint, RamificationPortrait, validate

__all__ = [
    "INF",
    "ComplexPoly",
    "RationalMap",
    "MarkedPoint",
    "RamificationPortrait",
    "chordal",
    "is_inf",
    "validate",
]
