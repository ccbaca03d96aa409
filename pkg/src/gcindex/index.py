"""Assembled self-index: build, query, serialize, report space.

File layout::

    b"GCIX" | format version (u8) | section*

and each section is ``u64 LE payload length | payload | 8-byte blake2b
digest of the payload``. Sections come in a fixed order (see
``SECTIONS``); every payload starts with its own structure version byte.
"""

from __future__ import annotations

import hashlib
import math
import os
import struct
from dataclasses import asdict, dataclass

from .builder import repair_compress
from .extract import Extractor, PathTrie, build_extractor
from .grammar import Grammar, GrammarTree, build_grammar_tree, preprocess
from .search import BinaryRelation, LocateReport, Searcher, build_relation
from .succinct import BitVector, DfudsTree, FormatError, IntSequence, InvertiblePermutation, SparseBitmap
from .succinct._io import ByteReader, ByteWriter

MAGIC = b"GCIX"
FORMAT_VERSION = 1
_META_VERSION = 1

SECTIONS = ("metadata", "Y", "tree topology", "Z", "X'", "pi", "L", "left trie", "right trie", "S_B", "S_L")


@dataclass(frozen=True)
class BuildParams:
    epsilon: float = 1.0
    delta: float | None = None
    min_freq: int | None = 2


@dataclass
class IndexStats:
    n: int
    sigma: int
    N: int
    u: int
    height: int
    parse_height: int
    relation_columns: int
    bits_metadata: int
    bits_Y: int
    bits_tree_topology: int
    bits_Z: int
    bits_X_prime: int
    bits_pi: int
    bits_L: int
    bits_left_trie: int
    bits_right_trie: int
    bits_S_B: int
    bits_S_L: int
    bits_total: int
    bits_overhead: int
    bound_bits: float
    bits_per_symbol: float

    def as_dict(self) -> dict[str, int | float]:
        return asdict(self)


class SelfIndex:
    def __init__(self, tree: GrammarTree, extractor: Extractor, relation: BinaryRelation,
                 params: BuildParams, parse_height: int, height: int):
        self.tree = tree
        self.extractor = extractor
        self.relation = relation
        self.params = params
        self.parse_height = parse_height
        self.height = height
        self.searcher = Searcher(tree, extractor, relation)

    @property
    def u(self) -> int:
        return self.tree.u

    @property
    def n(self) -> int:
        return self.tree.n

    @property
    def size(self) -> int:
        return self.tree.size

    def locate(self, pattern: bytes) -> list[int]:
        return self.searcher.locate(pattern)

    def locate_report(self, pattern: bytes) -> LocateReport:
        return self.searcher.locate_report(pattern)

    def extract(self, pos: int, length: int) -> bytes:
        return self.extractor.extract(pos, length)

    # -- serialization ------------------------------------------------------------

    def _metadata(self) -> bytes:
        t = self.tree
        p = self.params
        w = ByteWriter(_META_VERSION)
        w.u64(t.u).u64(t.n).u64(t.size).u64(t.start).u64(self.height).u64(self.parse_height)
        w.f64(p.epsilon).f64(0.0 if p.delta is None else p.delta).u64(p.min_freq or 0)
        return w.blob(t.alphabet).getvalue()

    def sections(self) -> list[bytes]:
        t = self.tree
        return [
            self._metadata(),
            t.y.to_bytes(),
            t.topology.to_bytes(),
            t.z.to_bytes(),
            t.xprime.to_bytes(),
            t.pi.to_bytes(),
            t.leaf_starts.to_bytes(),
            self.extractor.left.to_bytes(),
            self.extractor.right.to_bytes(),
            self.relation.rows_to_bytes(),
            self.relation.labels_to_bytes(),
        ]

    def to_bytes(self) -> bytes:
        out = [MAGIC, bytes([FORMAT_VERSION])]
        for payload in self.sections():
            out.append(struct.pack("<Q", len(payload)))
            out.append(payload)
            out.append(_digest(payload))
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SelfIndex":
        if data[:4] != MAGIC:
            raise FormatError("bad magic")
        if len(data) < 5:
            raise FormatError("truncated header")
        if data[4] != FORMAT_VERSION:
            raise FormatError(f"format version mismatch: file has {data[4]}, expected {FORMAT_VERSION}")
        pos = 5
        payloads = []
        for name in SECTIONS:
            if pos + 8 > len(data):
                raise FormatError(f"truncated section '{name}'")
            (size,) = struct.unpack_from("<Q", data, pos)
            pos += 8
            if pos + size + 8 > len(data):
                raise FormatError(f"truncated section '{name}'")
            payload = data[pos:pos + size]
            pos += size
            if data[pos:pos + 8] != _digest(payload):
                raise FormatError(f"checksum mismatch in section '{name}'")
            pos += 8
            payloads.append(payload)
        if pos != len(data):
            raise FormatError(f"{len(data) - pos} trailing bytes after the last section")
        try:
            return cls._assemble(payloads)
        except FormatError:
            raise
        except (ValueError, IndexError, KeyError) as exc:
            raise FormatError(f"inconsistent index: {exc}") from exc

    @classmethod
    def _assemble(cls, payloads: list[bytes]) -> "SelfIndex":
        def part(k, parser):
            try:
                return parser(payloads[k])
            except FormatError as exc:
                raise FormatError(f"section '{SECTIONS[k]}': {exc}") from exc

        r = ByteReader(payloads[0], _META_VERSION, "metadata")
        u, n, size, start, height, parse_height = (r.u64() for _ in range(6))
        epsilon, delta, min_freq = r.f64(), r.f64(), r.u64()
        alphabet = r.blob()
        r.done()
        y = part(1, BitVector.from_bytes)
        topo = part(2, DfudsTree.from_bytes)
        z = part(3, BitVector.from_bytes)
        xprime = part(4, IntSequence.from_bytes)
        pi = part(5, InvertiblePermutation.from_bytes)
        leaf_starts = part(6, SparseBitmap.from_bytes)
        left = part(7, PathTrie.from_bytes)
        right = part(8, PathTrie.from_bytes)
        try:
            relation = BinaryRelation.from_sections(payloads[9], payloads[10])
        except FormatError as exc:
            raise FormatError(f"section 'S_B'/'S_L': {exc}") from exc
        if len(y) != n or y.ones != len(alphabet) or topo.nodes != size + 1 or len(z) != topo.nodes:
            raise FormatError("section sizes disagree with the metadata")
        if leaf_starts.universe != u + 1 or leaf_starts.count != topo.leaf_count + 1:
            raise FormatError("section 'L' disagrees with the tree")
        tree = GrammarTree(topo, z, xprime, pi, y, leaf_starts, alphabet, start)
        params = BuildParams(epsilon, delta or None, min_freq or None)
        return cls(tree, Extractor(tree, left, right), relation, params, parse_height, height)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SelfIndex":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())

    # -- space accounting -----------------------------------------------------------

    def stats(self) -> IndexStats:
        secs = self.sections()
        bits = [8 * len(s) for s in secs]
        total = 8 * (len(MAGIC) + 1 + sum(len(s) + 16 for s in secs))
        t = self.tree
        n, big_n, u = t.n, t.size, t.u
        lg = lambda x: math.log2(x) if x > 1 else 0.0  # noqa: E731
        bound = 2 * big_n * lg(n) + big_n * lg(u) + self.params.epsilon * n * lg(n)
        return IndexStats(
            n=n, sigma=len(t.alphabet), N=big_n, u=u, height=self.height, parse_height=self.parse_height,
            relation_columns=self.relation.columns,
            bits_metadata=bits[0], bits_Y=bits[1], bits_tree_topology=bits[2], bits_Z=bits[3],
            bits_X_prime=bits[4], bits_pi=bits[5], bits_L=bits[6], bits_left_trie=bits[7],
            bits_right_trie=bits[8], bits_S_B=bits[9], bits_S_L=bits[10],
            bits_total=total, bits_overhead=total - sum(bits),
            bound_bits=round(bound, 1), bits_per_symbol=round(total / u, 4),
        )


def _digest(payload: bytes) -> bytes:
    return hashlib.blake2b(payload, digest_size=8).digest()


def parse_tree_height(rules: list[tuple[int, ...]], start: int) -> int:
    """Height of the full parse tree: terminal rules count as leaves at height 0."""
    heights: list[int | None] = [None] * len(rules)
    stack = [start]
    while stack:
        k = stack[-1]
        rhs = rules[k - 1]
        if rhs[0] < 0:
            heights[k - 1] = 0
            stack.pop()
            continue
        pending = [t for t in rhs if heights[t - 1] is None]
        if pending:
            stack.extend(pending)
            continue
        heights[k - 1] = 1 + max(heights[t - 1] for t in rhs)  # type: ignore[type-var]
        stack.pop()
    return heights[start - 1]  # type: ignore[return-value]


def build_index(text: bytes | None = None, grammar: Grammar | None = None, epsilon: float = 1.0,
                delta: float | None = None, min_freq: int = 2) -> SelfIndex:
    """Index ``text`` (compressed with Re-Pair) or the text generated by ``grammar``."""
    if (text is None) == (grammar is None):
        raise ValueError("give exactly one of text or grammar")
    if grammar is None:
        grammar = repair_compress(text, min_freq)  # type: ignore[arg-type]
        params = BuildParams(epsilon, delta, min_freq)
    else:
        params = BuildParams(epsilon, delta, None)
    pg = preprocess(grammar)
    tree = build_grammar_tree(pg, delta)
    extractor = build_extractor(pg, tree, epsilon)
    relation = build_relation(tree, pg.expand())
    return SelfIndex(tree, extractor, relation, params, parse_tree_height(pg.rules, pg.start),
                     tree.topology.height())
