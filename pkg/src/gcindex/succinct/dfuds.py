"""Ordinal trees in DFUDS form.

The bitmap is ``(`` followed by each node's degree in unary (``1`` per
child, then a closing ``0``), in preorder; ``2 * nodes`` bits in total.
A node handle is the 1-based bitmap position where its description
starts, so the root is ``2``.

Parenthesis matching uses a small range-min tree over the excess
``E(k) = #1 - #0`` in ``bits[1..k]``: one leaf per 64-bit word, byte
lookup tables inside a word. Leaves are located with an auxiliary bitmap
marking leaf descriptions; depth and level-ancestor use an optional
depth sequence (preorder depths as an :class:`IntSequence`), otherwise
they climb parent pointers.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ._io import ByteReader, ByteWriter, FormatError
from .bitvector import BitVector
from .sequence import IntSequence

_VERSION = 1

_BYTE_TOT = [0] * 256
_BYTE_MIN = [0] * 256
for _b in range(256):
    _cur, _mn = 0, 9
    for _k in range(8):
        _cur += 1 if (_b >> _k) & 1 else -1
        _mn = min(_mn, _cur)
    _BYTE_TOT[_b], _BYTE_MIN[_b] = _cur, _mn

_INF = 1 << 62


class DfudsTree:
    __slots__ = ("nodes", "bits", "_leaves", "_seg", "_seg_size", "_depths")

    def __init__(self, degrees: Sequence[int], depth_index: bool = False):
        """Build from the out-degrees of the nodes listed in preorder."""
        n = len(degrees)
        if n == 0:
            raise ValueError("a tree needs at least one node")
        deg = np.asarray(degrees, dtype=np.int64)
        if deg.min() < 0 or int(deg.sum()) != n - 1:
            raise ValueError("degrees do not describe a tree")
        # pending-children counter must stay positive until the last node
        pending = np.cumsum(deg - 1) + 1
        if n > 1 and pending[:-1].min() <= 0:
            raise ValueError("degrees are not a valid preorder degree sequence")
        bits = np.zeros(2 * n, dtype=np.uint8)
        # closing zero of node k sits at 1 + sum(deg[:k+1]) + k (0-based)
        close = 1 + np.cumsum(deg) + np.arange(n)
        bits[:] = 1
        bits[close] = 0
        self.nodes = n
        self.bits = BitVector(bits)
        starts = np.concatenate([[1], close[:-1] + 1])  # 0-based description starts
        leaf_pos = starts[deg == 0] + 1
        self._leaves = BitVector.from_positions(leaf_pos.tolist(), 2 * n)
        self._build_excess_index()
        self._depths = None
        if depth_index:
            self._depths = IntSequence([d + 1 for d in _preorder_depths(degrees)])

    @classmethod
    def from_parents(cls, parents: Sequence[int], depth_index: bool = False) -> "DfudsTree":
        """Build from a preorder parent array (``parents[0]`` is ignored; parents are 1-based preorders)."""
        deg = [0] * len(parents)
        for p in parents[1:]:
            deg[p - 1] += 1
        return cls(deg, depth_index)

    def _build_excess_index(self) -> None:
        length = self.bits.length
        arr = np.unpackbits(
            np.asarray(self.bits.words, dtype=np.uint64).astype("<u8").view(np.uint8), bitorder="little"
        )[:length].astype(np.int64)
        excess = np.cumsum(2 * arr - 1)
        nblocks = len(self.bits.words)
        mins = np.minimum.reduceat(excess, np.arange(0, length, 64)).tolist() if length else []
        size = 1
        while size < max(1, nblocks):
            size <<= 1
        seg = [_INF] * (2 * size)
        seg[size:size + nblocks] = mins
        for i in range(size - 1, 0, -1):
            a, b = seg[2 * i], seg[2 * i + 1]
            seg[i] = a if a < b else b
        self._seg = seg
        self._seg_size = size

    # -- excess machinery -------------------------------------------------

    def _excess(self, k: int) -> int:
        return 2 * self.bits.rank1(k) - k

    def _first_block_leq(self, lo: int, target: int) -> int:
        seg, size = self._seg, self._seg_size
        if lo >= size:
            return -1
        i = lo + size
        while seg[i] > target:
            while i & 1:
                i >>= 1
            if i == 0:
                return -1
            i += 1
        while i < size:
            i = 2 * i if seg[2 * i] <= target else 2 * i + 1
        return i - size

    def _last_block_leq(self, hi: int, target: int) -> int:
        seg, size = self._seg, self._seg_size
        if hi < 0:
            return -1
        i = hi + size
        while seg[i] > target:
            while not i & 1:
                i >>= 1
            if i == 1:
                return -1
            i -= 1
        while i < size:
            i = 2 * i + 1 if seg[2 * i + 1] <= target else 2 * i
        return i - size

    def _scan_fwd(self, w: int, off: int, cur: int, target: int) -> int:
        """Scan word ``w`` from bit offset ``off``; ``cur`` is the excess before that bit."""
        word = self.bits.words[w]
        end = min(64, self.bits.length - (w << 6))
        while off < end:
            if not off & 7 and off + 8 <= end:
                byte = (word >> off) & 0xFF
                if cur + _BYTE_MIN[byte] > target:
                    cur += _BYTE_TOT[byte]
                    off += 8
                    continue
            cur += 1 if (word >> off) & 1 else -1
            if cur <= target:
                return (w << 6) + off + 1
            off += 1
        return 0

    def _fwd_leq(self, i: int, target: int) -> int:
        """Smallest ``j >= i`` with ``E(j) <= target``, or 0."""
        q = i - 1
        w = q >> 6
        j = self._scan_fwd(w, q & 63, self._excess(i - 1), target)
        if j:
            return j
        b = self._first_block_leq(w + 1, target)
        if b < 0:
            return 0
        return self._scan_fwd(b, 0, self._excess(b << 6), target)

    def _scan_bwd(self, w: int, k: int, cur: int, target: int) -> int:
        """Scan positions ``k`` down to the first of word ``w``; ``cur = E(k)``. Returns -1 if none."""
        word = self.bits.words[w]
        first = (w << 6) + 1
        while True:
            if cur <= target:
                return k
            if k == first:
                return -1
            off = k - 1 - (w << 6)
            if off & 7 == 7 and k - 8 >= first - 1:
                byte = (word >> (off - 7)) & 0xFF
                before = cur - _BYTE_TOT[byte]
                if before + _BYTE_MIN[byte] > target:
                    cur = before
                    k -= 8
                    if k < first:
                        # E(first - 1) belongs to the previous word
                        return -1 if cur > target else k
                    continue
            cur -= 1 if (word >> off) & 1 else -1
            k -= 1

    def _bwd_leq(self, i: int, target: int) -> int:
        """Largest ``k <= i`` (``k >= 0``) with ``E(k) <= target``, or -1."""
        if i >= 1:
            w = (i - 1) >> 6
            k = self._scan_bwd(w, i, self._excess(i), target)
            if k >= 0:
                return k
            b = self._last_block_leq(w - 1, target)
            if b >= 0:
                last = min((b + 1) << 6, self.bits.length)
                return self._scan_bwd(b, last, self._excess(last), target)
        return 0 if target >= 0 else -1

    def find_close(self, i: int) -> int:
        return self._fwd_leq(i, self._excess(i - 1))

    def find_open(self, i: int) -> int:
        return self._bwd_leq(i - 1, self._excess(i)) + 1

    # -- navigation -------------------------------------------------------

    @property
    def root(self) -> int:
        return 2

    def node(self, p: int) -> int:
        if not 1 <= p <= self.nodes:
            raise IndexError(f"preorder {p} outside [1, {self.nodes}]")
        return 2 if p == 1 else self.bits.select0(p - 1) + 1

    def preorder(self, v: int) -> int:
        return self.bits.rank0(v - 1) + 1

    def degree(self, v: int) -> int:
        return self.bits.select0(self.bits.rank0(v - 1) + 1) - v

    def is_leaf(self, v: int) -> bool:
        return self._leaves.access(v) == 1

    def child(self, v: int, k: int) -> int:
        close = self.bits.select0(self.bits.rank0(v - 1) + 1)
        if not 1 <= k <= close - v:
            raise IndexError(f"child {k} of a node with degree {close - v}")
        return self.find_close(close - k) + 1

    def parent(self, v: int) -> int | None:
        if v == 2:
            return None
        j = self.find_open(v - 1)
        return self.node(self.bits.rank0(j) + 1)

    def nextsibling(self, v: int) -> int | None:
        if v == 2:
            return None
        j = self.find_open(v - 1) - 1
        if j < 2 or not self.bits.access(j):
            return None
        return self.find_close(j) + 1

    def subtree_end(self, v: int) -> int:
        """Last bitmap position of the subtree rooted at ``v``."""
        return self._fwd_leq(v, self._excess(v - 1) - 1)

    def subtree_size(self, v: int) -> int:
        return (self.subtree_end(v) - v + 2) >> 1

    def leafrank(self, v: int) -> int:
        """Leaves strictly before ``v`` in preorder."""
        return self._leaves.rank1(v - 1)

    def numleaves(self, v: int) -> int:
        return self._leaves.rank1(self.subtree_end(v)) - self._leaves.rank1(v - 1)

    @property
    def leaf_count(self) -> int:
        return self._leaves.ones

    def depth(self, v: int) -> int:
        if self._depths is not None:
            return self._depths.access(self.preorder(v)) - 1
        d = 0
        while v != 2:
            v = self.parent(v)
            d += 1
        return d

    def level_ancestor(self, v: int, k: int) -> int:
        """The ``k``-th ancestor of ``v`` (``k = 0`` is ``v`` itself)."""
        if k < 0:
            raise IndexError("ancestor distance must be >= 0")
        if self._depths is not None:
            p = self.preorder(v)
            d = self._depths.access(p) - 1 - k
            if d < 0:
                raise IndexError(f"node has no ancestor at distance {k}")
            return self.node(self._depths.prev(d + 1, p))
        for _ in range(k):
            v = self.parent(v)
            if v is None:
                raise IndexError(f"node has no ancestor at distance {k}")
        return v

    def depth_of_preorder(self, p: int) -> int:
        """Depth of the node with preorder ``p``; needs the depth index."""
        return self._depths.access(p) - 1

    def ancestor_preorder(self, p: int, d: int) -> int:
        """Preorder of the depth-``d`` ancestor of the node with preorder ``p``; needs the depth index.

        It is the last node at depth ``d`` not after ``p`` in preorder.
        """
        return self._depths.prev(d + 1, p)

    def children(self, v: int):
        c = self.child(v, 1) if self.degree(v) else None
        while c is not None:
            yield c
            c = self.nextsibling(c)

    def height(self) -> int:
        """Maximum node depth."""
        deg = self.degrees()
        return max(_preorder_depths(deg))

    def degrees(self) -> list[int]:
        return [self.degree(self.node(p)) for p in range(1, self.nodes + 1)]

    def size_in_bits(self) -> int:
        return len(self.to_bytes()) * 8

    def to_bytes(self) -> bytes:
        w = ByteWriter(_VERSION).u64(self.nodes).blob(self.bits.to_bytes())
        w.blob(self._depths.to_bytes() if self._depths is not None else b"")
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "DfudsTree":
        r = ByteReader(data, _VERSION, "dfuds tree")
        nodes = r.u64()
        bits = BitVector.from_bytes(r.blob())
        depth_raw = r.blob()
        r.done()
        if len(bits) != 2 * nodes:
            raise FormatError("dfuds tree: bitmap length is not 2 * nodes")
        t = cls.__new__(cls)
        t.nodes = nodes
        t.bits = bits
        zeros = [bits.select0(j) for j in range(1, nodes + 1)]
        starts = [2] + [z + 1 for z in zeros[:-1]]
        t._leaves = BitVector.from_positions([s for s, z in zip(starts, zeros) if s == z], 2 * nodes)
        t._build_excess_index()
        t._depths = IntSequence.from_bytes(depth_raw) if depth_raw else None
        return t


def _preorder_depths(degrees: Sequence[int]) -> list[int]:
    depths = [0] * len(degrees)
    stack: list[list[int]] = []  # [depth of children, remaining children]
    for k, d in enumerate(degrees):
        if stack:
            top = stack[-1]
            depths[k] = top[0]
            top[1] -= 1
            if top[1] == 0:
                stack.pop()
        if d:
            stack.append([depths[k] + 1, d])
    return depths
