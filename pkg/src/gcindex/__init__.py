"""Grammar-compressed self-index: locate and extract on a grammar-compressed text."""

from .builder import read_grammar, repair_compress, write_grammar
from .grammar import Grammar, GrammarError, preprocess
from .index import IndexStats, SelfIndex, build_index
from .succinct import FormatError

__all__ = [
    "FormatError",
    "Grammar",
    "GrammarError",
    "IndexStats",
    "SelfIndex",
    "build_index",
    "preprocess",
    "read_grammar",
    "repair_compress",
    "write_grammar",
]
