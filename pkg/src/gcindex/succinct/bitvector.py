"""Plain bitvector with constant-time rank and logarithmic select.

Positions are 1-based: ``rank1(i)`` counts ones in ``bits[1..i]`` and
``select1(j)`` returns the position of the ``j``-th one.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Iterable, Sequence

import numpy as np

from ._io import ByteReader, ByteWriter, FormatError

_VERSION = 1

POP8 = [bin(b).count("1") for b in range(256)]
# SEL8[b][k] = offset of the (k+1)-th set bit of byte b
SEL8 = [[i for i in range(8) if (b >> i) & 1] for b in range(256)]


class NotFoundError(LookupError):
    """The requested occurrence does not exist."""


def select_in_word(word: int, k: int) -> int:
    """0-based offset of the k-th (1-based) set bit of a 64-bit word."""
    shift = 0
    c = (word & 0xFFFFFFFF).bit_count()
    if k > c:
        k -= c
        word >>= 32
        shift = 32
    c = (word & 0xFFFF).bit_count()
    if k > c:
        k -= c
        word >>= 16
        shift += 16
    c = POP8[word & 0xFF]
    if k > c:
        k -= c
        word >>= 8
        shift += 8
    return shift + SEL8[word & 0xFF][k - 1]


class BitVector:
    """Uncompressed bitvector over 64-bit words with a cumulative rank directory."""

    __slots__ = ("length", "words", "_cum1", "_cum0", "ones")

    def __init__(self, bits: Iterable[int] | np.ndarray = ()):
        arr = np.asarray(bits if isinstance(bits, np.ndarray) else list(bits), dtype=np.uint8)
        length = int(arr.size)
        packed = np.packbits(arr, bitorder="little")
        pad = (-packed.size) % 8
        if pad:
            packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
        self._init(packed.view("<u8").tolist(), length)

    @classmethod
    def from_words(cls, words: Sequence[int], length: int) -> "BitVector":
        bv = cls.__new__(cls)
        bv._init(list(words), length)
        return bv

    @classmethod
    def from_positions(cls, positions: Iterable[int], length: int) -> "BitVector":
        """Build from the 1-based positions of the one bits."""
        words = [0] * ((length + 63) >> 6)
        for p in positions:
            if not 1 <= p <= length:
                raise IndexError(f"position {p} outside [1, {length}]")
            q = p - 1
            words[q >> 6] |= 1 << (q & 63)
        return cls.from_words(words, length)

    def _init(self, words: list[int], length: int) -> None:
        if len(words) != (length + 63) >> 6:
            raise FormatError("word count does not match bit length")
        if length & 63:
            words[-1] &= (1 << (length & 63)) - 1
        self.length = length
        self.words = words
        cum1 = [0] * (len(words) + 1)
        cum0 = [0] * (len(words) + 1)
        total = 0
        for w, word in enumerate(words):
            total += word.bit_count()
            cum1[w + 1] = total
            cum0[w + 1] = min((w + 1) * 64, length) - total
        self._cum1 = cum1
        self._cum0 = cum0
        self.ones = total

    def __len__(self) -> int:
        return self.length

    def __iter__(self):
        for i in range(1, self.length + 1):
            yield self.access(i)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BitVector) and self.length == other.length and self.words == other.words

    def __repr__(self) -> str:
        if self.length <= 64:
            return f"BitVector('{self.to_string()}')"
        return f"BitVector(length={self.length}, ones={self.ones})"

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self)

    @property
    def zeros(self) -> int:
        return self.length - self.ones

    def access(self, i: int) -> int:
        if not 1 <= i <= self.length:
            raise IndexError(f"position {i} outside [1, {self.length}]")
        i -= 1
        return (self.words[i >> 6] >> (i & 63)) & 1

    def rank1(self, i: int) -> int:
        if not 0 <= i <= self.length:
            raise IndexError(f"rank position {i} outside [0, {self.length}]")
        r = i & 63
        if r:
            return self._cum1[i >> 6] + (self.words[i >> 6] & ((1 << r) - 1)).bit_count()
        return self._cum1[i >> 6]

    def rank0(self, i: int) -> int:
        return i - self.rank1(i)

    def select1(self, j: int) -> int:
        if not 1 <= j <= self.ones:
            raise NotFoundError(f"select1({j}) with {self.ones} ones")
        w = bisect_left(self._cum1, j) - 1
        return (w << 6) + select_in_word(self.words[w], j - self._cum1[w]) + 1

    def select0(self, j: int) -> int:
        if not 1 <= j <= self.length - self.ones:
            raise NotFoundError(f"select0({j}) with {self.length - self.ones} zeros")
        w = bisect_left(self._cum0, j) - 1
        return (w << 6) + select_in_word(~self.words[w] & 0xFFFFFFFFFFFFFFFF, j - self._cum0[w]) + 1

    def succ0(self, i: int) -> int:
        """Smallest position >= i holding a zero."""
        return self.select0(self.rank0(i - 1) + 1)

    def size_in_bits(self) -> int:
        return len(self.to_bytes()) * 8

    def to_bytes(self) -> bytes:
        w = ByteWriter(_VERSION).u64(self.length)
        w.blob(np.asarray(self.words, dtype=np.uint64).astype("<u8").tobytes())
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitVector":
        r = ByteReader(data, _VERSION, "bitvector")
        length = r.u64()
        raw = r.blob()
        r.done()
        if len(raw) % 8:
            raise FormatError("bitvector: word payload not a multiple of 8 bytes")
        words = np.frombuffer(raw, dtype="<u8").tolist()
        return cls.from_words(words, length)
