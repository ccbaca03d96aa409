"""Elias-Fano encoded sparse bitmap (an indexable dictionary).

Stores ``m`` one-positions out of a universe ``U`` in about
``m * (2 + lg(U/m))`` bits; ``select1`` is a select on the upper-bits
bitvector plus a lookup of the low bits.
"""

from __future__ import annotations

from typing import Iterable

from ._io import ByteReader, ByteWriter, FormatError, pack_uints, unpack_uints
from .bitvector import BitVector, NotFoundError

_VERSION = 1


class SparseBitmap:
    __slots__ = ("universe", "count", "low_width", "_low", "_upper")

    def __init__(self, positions: Iterable[int], universe: int):
        pos = list(positions)
        for a, b in zip(pos, pos[1:]):
            if b <= a:
                raise ValueError("positions must be strictly increasing")
        if pos and not (1 <= pos[0] and pos[-1] <= universe):
            raise ValueError(f"positions must lie in [1, {universe}]")
        self.universe = universe
        self.count = len(pos)
        m = len(pos)
        self.low_width = max(0, (universe // m).bit_length() - 1) if m else 0
        lw = self.low_width
        mask = (1 << lw) - 1
        self._low = [(p - 1) & mask for p in pos]
        upper_len = m + ((universe - 1) >> lw) + 1 if m else 0
        self._upper = BitVector.from_positions(
            (((p - 1) >> lw) + k + 1 for k, p in enumerate(pos)), upper_len
        )

    def __len__(self) -> int:
        return self.universe

    def __repr__(self) -> str:
        return f"SparseBitmap(universe={self.universe}, count={self.count})"

    def select1(self, j: int) -> int:
        if not 1 <= j <= self.count:
            raise NotFoundError(f"select1({j}) with {self.count} ones")
        high = self._upper.select1(j) - j
        return ((high << self.low_width) | self._low[j - 1]) + 1

    def positions(self) -> list[int]:
        return [self.select1(j) for j in range(1, self.count + 1)]

    def rank1(self, i: int) -> int:
        """Number of stored positions <= i (binary search over select1)."""
        if not 0 <= i <= self.universe:
            raise IndexError(f"rank position {i} outside [0, {self.universe}]")
        lo, hi = 0, self.count
        while lo < hi:
            mid = (lo + hi + 1) >> 1
            if self.select1(mid) <= i:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def access(self, i: int) -> int:
        if not 1 <= i <= self.universe:
            raise IndexError(f"position {i} outside [1, {self.universe}]")
        r = self.rank1(i)
        return int(r > 0 and self.select1(r) == i)

    def to_bytes(self) -> bytes:
        w = ByteWriter(_VERSION).u64(self.universe).u64(self.count).u8(self.low_width)
        w.blob(pack_uints(self._low, self.low_width) if self.low_width else b"")
        w.blob(self._upper.to_bytes())
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "SparseBitmap":
        r = ByteReader(data, _VERSION, "sparse bitmap")
        universe, count, lw = r.u64(), r.u64(), r.u8()
        low_raw = r.blob()
        upper = BitVector.from_bytes(r.blob())
        r.done()
        if upper.ones != count:
            raise FormatError("sparse bitmap: upper bits disagree with count")
        low = unpack_uints(low_raw, lw, count) if lw else [0] * count
        sb = cls.__new__(cls)
        sb.universe, sb.count, sb.low_width = universe, count, lw
        sb._low, sb._upper = low, upper
        return sb

