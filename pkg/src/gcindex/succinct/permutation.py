"""Permutation with constant-time forward access and shortcut-based inverse.

Every ``t``-th element along each cycle longer than ``t`` is marked and
stores a back pointer ``t`` steps behind it. ``inverse(j)`` walks forward
from ``j`` until it either closes the cycle or meets a mark, jumps back,
and walks forward again: at most about ``2t`` steps. ``t = 1`` gives an
explicit inverse table.
"""

from __future__ import annotations

from typing import Sequence

from ._io import ByteReader, ByteWriter, FormatError
from .bitvector import BitVector

_VERSION = 1


class InvertiblePermutation:
    __slots__ = ("n", "period", "_fwd", "_marks", "_back")

    def __init__(self, values: Sequence[int], period: int = 1):
        """``values[i-1]`` is the image of ``i``; values form a bijection on ``[1..n]``."""
        if period < 1:
            raise ValueError("sampling period must be >= 1")
        n = len(values)
        fwd = [v - 1 for v in values]
        seen = [False] * n
        for v in fwd:
            if not 0 <= v < n or seen[v]:
                raise ValueError("values are not a permutation of [1..n]")
            seen[v] = True
        self.n = n
        self.period = period
        self._fwd = fwd
        back_of: dict[int, int] = {}
        visited = [False] * n
        for start in range(n):
            if visited[start]:
                continue
            cycle = []
            x = start
            while not visited[x]:
                visited[x] = True
                cycle.append(x)
                x = fwd[x]
            if len(cycle) <= period:
                continue
            for k in range(0, len(cycle), period):
                back_of[cycle[k]] = cycle[(k - period) % len(cycle)]
        self._marks = BitVector.from_positions(sorted(x + 1 for x in back_of), n)
        self._back = [back_of[x] for x in sorted(back_of)]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"InvertiblePermutation(n={self.n}, period={self.period})"

    def apply(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise IndexError(f"index {i} outside [1, {self.n}]")
        return self._fwd[i - 1] + 1

    def inverse(self, j: int) -> int:
        if not 1 <= j <= self.n:
            raise IndexError(f"index {j} outside [1, {self.n}]")
        target = j - 1
        fwd = self._fwd
        marks = self._marks
        mwords = marks.words
        x = target
        while True:
            nxt = fwd[x]
            if nxt == target:
                return x + 1
            if (mwords[x >> 6] >> (x & 63)) & 1:
                x = self._back[marks.rank1(x)]
                break
            x = nxt
        while True:
            nxt = fwd[x]
            if nxt == target:
                return x + 1
            x = nxt

    def to_list(self) -> list[int]:
        return [v + 1 for v in self._fwd]

    def size_in_bits(self) -> int:
        return len(self.to_bytes()) * 8

    def to_bytes(self) -> bytes:
        w = ByteWriter(_VERSION).u64(self.n).u64(self.period)
        w.uints(self._fwd, width=max(1, (self.n - 1).bit_length()))
        w.blob(self._marks.to_bytes())
        w.uints(self._back, width=max(1, (self.n - 1).bit_length()))
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "InvertiblePermutation":
        r = ByteReader(data, _VERSION, "permutation")
        n, period = r.u64(), r.u64()
        fwd = r.uints()
        marks = BitVector.from_bytes(r.blob())
        back = r.uints()
        r.done()
        if len(fwd) != n or len(marks) != n or marks.ones != len(back):
            raise FormatError("permutation: inconsistent sizes")
        p = cls.__new__(cls)
        p.n, p.period = n, period
        p._fwd, p._marks, p._back = fwd, marks, back
        return p
