"""Exact sigma-semilinear algebra over F_q, Dieudonne F_q[[z]]-modules,
Newton and Hodge polygons, isogeny solvers and abelian sheaves on P^1."""
from .errors import (AbelsheafError, FieldMismatch, InsufficientPrecision, MalformedInput,
                     ValidationFailure)
from .gf import FqElement, FqField, artin_schreier_solve, embed, make_field
from .isocrystal import (DieudonneModule, Isocrystal, classify, hodge_polygon, isogeny_solve,
                         newton_polygon, validate)
from .motive import AbelianSheafP1, validate_sheaf
from .polygon import ConvexPolygon, SlopeMultiset
from .series import Poly, TruncSeries

__all__ = [
    "AbelsheafError", "FieldMismatch", "InsufficientPrecision", "MalformedInput",
    "ValidationFailure", "FqElement", "FqField", "artin_schreier_solve", "embed", "make_field",
    "DieudonneModule", "Isocrystal", "classify", "hodge_polygon", "isogeny_solve",
    "newton_polygon", "validate", "AbelianSheafP1", "validate_sheaf", "ConvexPolygon",
    "SlopeMultiset", "Poly", "TruncSeries",
]
