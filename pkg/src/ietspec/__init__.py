"""Exact interval exchanges, Rauzy renormalization and spectra of the associated Schroedinger operators."""

__version__ = "0.1.0"

from .errors import IetError
from .iet import (
    Iet,
    InducedSystem,
    Itinerary,
    Permutation,
    evaluate,
    golden_rotation,
    induce,
    invert,
    keane_check,
    make_iet,
    orbit_symbols,
    rotation,
)
from .scalar import QuadraticReal, compare, floor_div, format_scalar, parse_scalar

__all__ = [
    "IetError",
    "Iet",
    "InducedSystem",
    "Itinerary",
    "Permutation",
    "QuadraticReal",
    "compare",
    "evaluate",
    "floor_div",
    "format_scalar",
    "golden_rotation",
    "induce",
    "invert",
    "keane_check",
    "make_iet",
    "orbit_symbols",
    "parse_scalar",
    "rotation",
]
