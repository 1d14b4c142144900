"""Systematic MDS codes concatenated with random linear fountain codes over GF(2^m)."""

from ._backend import NAME as BACKEND
from .gf import FieldElement, FieldSpec, field_new, field_of_order

__version__ = "0.1.0"

__all__ = ["BACKEND", "FieldElement", "FieldSpec", "__version__", "field_new", "field_of_order"]
