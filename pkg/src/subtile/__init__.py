"""Exact workbench for planar substitution tilings and their tiling algebras."""

from .errors import InputError, ResourceError, SubtileError, UndecidableComparison, VerificationError
from .field import CyclotomicField, FieldElement
from .geometry import Contact, Polygon, polygon_contact
from .system import GroupSpec, Patch, Tile, TilingSystem, load_system
from .catalog import load_bundled

__version__ = "0.1.0"

__all__ = [
    "Contact",
    "CyclotomicField",
    "FieldElement",
    "GroupSpec",
    "InputError",
    "Patch",
    "Polygon",
    "ResourceError",
    "SubtileError",
    "Tile",
    "TilingSystem",
    "UndecidableComparison",
    "VerificationError",
    "load_bundled",
    "load_system",
    "polygon_contact",
]
