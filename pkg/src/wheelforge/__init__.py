"""Exact-arithmetic computer algebra for Jacobi and Weil diagram spaces."""

from .diagrams import (
    Diagram,
    DiagramError,
    FormalSum,
    SignatureError,
    SpaceSignature,
    canonicalize,
    disjoint_union,
    juxtapose,
)

__all__ = [
    "Diagram",
    "DiagramError",
    "FormalSum",
    "SignatureError",
    "SpaceSignature",
    "canonicalize",
    "disjoint_union",
    "juxtapose",
]

__version__ = "0.1.0"
