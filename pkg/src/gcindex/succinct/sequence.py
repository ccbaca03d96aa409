"""Integer sequence over ``[1..sigma]`` backed by a wavelet matrix.

Supports access, rank, select and two-dimensional range reporting
(positions in a column range whose symbols fall in a value range), all in
``O(lg sigma)`` bitvector operations per reported item.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Sequence

from ._io import ByteReader, ByteWriter, FormatError
from .bitvector import BitVector, NotFoundError, select_in_word

_VERSION = 1


class IntSequence:
    __slots__ = ("length", "sigma", "nbits", "_levels", "_zeros")

    def __init__(self, symbols: Sequence[int] | Iterable[int], sigma: int | None = None):
        values = list(symbols)
        if sigma is None:
            sigma = max(values, default=1)
        if sigma < 1:
            raise ValueError("alphabet size must be >= 1")
        for v in values:
            if not 1 <= v <= sigma:
                raise ValueError(f"symbol {v} outside [1, {sigma}]")
        self.length = len(values)
        self.sigma = sigma
        self.nbits = max(1, (sigma - 1).bit_length())
        self._levels: list[BitVector] = []
        self._zeros: list[int] = []
        cur = [v - 1 for v in values]
        for level in range(self.nbits):
            shift = self.nbits - 1 - level
            bits = [(v >> shift) & 1 for v in cur]
            bv = BitVector(bits)
            self._levels.append(bv)
            self._zeros.append(bv.zeros)
            cur = [v for v, b in zip(cur, bits) if not b] + [v for v, b in zip(cur, bits) if b]

    def __len__(self) -> int:
        return self.length

    def __repr__(self) -> str:
        return f"IntSequence(length={self.length}, sigma={self.sigma})"

    def __iter__(self):
        for i in range(1, self.length + 1):
            yield self.access(i)

    def to_list(self) -> list[int]:
        return list(self)

    def _check_symbol(self, a: int) -> None:
        if not 1 <= a <= self.sigma:
            raise IndexError(f"symbol {a} outside [1, {self.sigma}]")

    def access(self, i: int) -> int:
        if not 1 <= i <= self.length:
            raise IndexError(f"position {i} outside [1, {self.length}]")
        p = i - 1
        value = 0
        for bv, z in zip(self._levels, self._zeros):
            words = bv.words
            bit = (words[p >> 6] >> (p & 63)) & 1
            r = p & 63
            ones = bv._cum1[p >> 6] + ((words[p >> 6] & ((1 << r) - 1)).bit_count() if r else 0)
            if bit:
                p = z + ones
                value = (value << 1) | 1
            else:
                p -= ones
                value <<= 1
        return value + 1

    def _descend(self, c: int, s: int, e: int) -> tuple[int, int]:
        """Follow value ``c`` (0-based) from the top range ``[s, e)`` to the bottom level."""
        shift = self.nbits - 1
        for bv, z in zip(self._levels, self._zeros):
            words, cum = bv.words, bv._cum1
            r = s & 63
            rs = cum[s >> 6] + ((words[s >> 6] & ((1 << r) - 1)).bit_count() if r else 0)
            r = e & 63
            re = cum[e >> 6] + ((words[e >> 6] & ((1 << r) - 1)).bit_count() if r else 0)
            if (c >> shift) & 1:
                s, e = z + rs, z + re
            else:
                s, e = s - rs, e - re
            shift -= 1
        return s, e

    def rank(self, a: int, i: int) -> int:
        """Occurrences of ``a`` in positions ``1..i``."""
        self._check_symbol(a)
        if not 0 <= i <= self.length:
            raise IndexError(f"rank position {i} outside [0, {self.length}]")
        s, e = self._descend(a - 1, 0, i)
        return e - s

    def select(self, a: int, j: int) -> int:
        """Position of the ``j``-th occurrence of ``a``."""
        self._check_symbol(a)
        s, e = self._descend(a - 1, 0, self.length)
        if not 1 <= j <= e - s:
            raise NotFoundError(f"symbol {a} occurs {e - s} times, asked for #{j}")
        return self._lift(s + j - 1, a - 1)

    def prev(self, a: int, i: int) -> int:
        """Last position ``<= i`` holding ``a`` (that is, ``select(a, rank(a, i))``), or 0."""
        self._check_symbol(a)
        if not 0 <= i <= self.length:
            raise IndexError(f"position {i} outside [0, {self.length}]")
        s, e = self._descend(a - 1, 0, i)
        return self._lift(e - 1, a - 1) if e > s else 0

    def _lift(self, p: int, c: int) -> int:
        # map a 0-based position at the bottom level back to the original sequence
        for level in range(self.nbits - 1, -1, -1):
            bv = self._levels[level]
            if (c >> (self.nbits - 1 - level)) & 1:
                k, cum, mask = p - self._zeros[level] + 1, bv._cum1, 0
            else:
                k, cum, mask = p + 1, bv._cum0, 0xFFFFFFFFFFFFFFFF
            w = bisect_left(cum, k) - 1
            p = (w << 6) + select_in_word(bv.words[w] ^ mask, k - cum[w])
        return p + 1

    def range_report(self, cols: tuple[int, int], rows: tuple[int, int]) -> list[tuple[int, int]]:
        """All ``(position, symbol)`` with position in ``cols`` and symbol in ``rows``."""
        a1, a2 = cols
        b1, b2 = rows
        a1, a2 = max(a1, 1), min(a2, self.length)
        b1, b2 = max(b1, 1), min(b2, self.sigma)
        if a1 > a2 or b1 > b2:
            return []
        lo_v, hi_v = b1 - 1, b2 - 1
        nbits = self.nbits
        out: list[tuple[int, int]] = []
        # (level, start, end, value prefix)
        stack = [(0, a1 - 1, a2, 0)]
        while stack:
            level, s, e, prefix = stack.pop()
            if s >= e:
                continue
            span = nbits - level
            # value interval covered by this node
            node_lo = prefix << span
            node_hi = node_lo + (1 << span) - 1
            if node_hi < lo_v or node_lo > hi_v:
                continue
            if level == nbits:
                for p in range(s, e):
                    out.append((self._lift(p, prefix), prefix + 1))
                continue
            bv, z = self._levels[level], self._zeros[level]
            r1s, r1e = bv.rank1(s), bv.rank1(e)
            stack.append((level + 1, z + r1s, z + r1e, (prefix << 1) | 1))
            stack.append((level + 1, s - r1s, e - r1e, prefix << 1))
        out.sort()
        return out

    def size_in_bits(self) -> int:
        return len(self.to_bytes()) * 8

    def to_bytes(self) -> bytes:
        w = ByteWriter(_VERSION).u64(self.length).u64(self.sigma).u8(self.nbits)
        for bv in self._levels:
            w.blob(bv.to_bytes())
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "IntSequence":
        r = ByteReader(data, _VERSION, "int sequence")
        length, sigma, nbits = r.u64(), r.u64(), r.u8()
        levels = [BitVector.from_bytes(r.blob()) for _ in range(nbits)]
        r.done()
        if nbits != max(1, (sigma - 1).bit_length()) or any(len(bv) != length for bv in levels):
            raise FormatError("int sequence: inconsistent level layout")
        seq = cls.__new__(cls)
        seq.length, seq.sigma, seq.nbits = length, sigma, nbits
        seq._levels = levels
        seq._zeros = [bv.zeros for bv in levels]
        return seq
