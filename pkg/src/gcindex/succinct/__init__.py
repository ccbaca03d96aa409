"""Succinct data-structure toolbox (1-based positions throughout)."""

from ._io import FormatError
from .bitvector import BitVector, NotFoundError
from .dfuds import DfudsTree
from .permutation import InvertiblePermutation
from .sequence import IntSequence
from .sparse import SparseBitmap

__all__ = [
    "BitVector",
    "DfudsTree",
    "FormatError",
    "IntSequence",
    "InvertiblePermutation",
    "NotFoundError",
    "SparseBitmap",
]
