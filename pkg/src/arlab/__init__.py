"""Desk-scale numerics for Fourier restriction to curves with affine arclength measure."""

from .curves import Curve, OffspringSpec
from .errors import (
    ArgumentError,
    ArlabError,
    ConstraintError,
    DegenerateFrameError,
    DomainError,
    PreconditionError,
    ResolutionError,
)

__version__ = "0.1.0"

__all__ = [
    "Curve",
    "OffspringSpec",
    "ArlabError",
    "ArgumentError",
    "ConstraintError",
    "DegenerateFrameError",
    "DomainError",
    "PreconditionError",
    "ResolutionError",
]
