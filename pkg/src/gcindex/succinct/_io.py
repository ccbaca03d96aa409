"""Little-endian byte sections and fixed-width integer packing."""

from __future__ import annotations

import struct
from typing import Sequence

import numpy as np


class FormatError(ValueError):
    """Raised when a serialized structure cannot be decoded."""


def width_for(max_value: int) -> int:
    return max(1, int(max_value).bit_length())


def pack_uints(values: Sequence[int], width: int) -> bytes:
    """Pack non-negative integers into ``width`` bits each, LSB first."""
    if not 1 <= width <= 64:
        raise ValueError(f"width must be in [1, 64], got {width}")
    if len(values) == 0:
        return b""
    arr = np.asarray(values, dtype=np.uint64).astype("<u8")
    bits = np.unpackbits(arr.view(np.uint8).reshape(-1, 8), axis=1, bitorder="little")
    return np.packbits(bits[:, :width].reshape(-1), bitorder="little").tobytes()


def unpack_uints(data: bytes, width: int, count: int) -> list[int]:
    if count == 0:
        return []
    nbits = width * count
    if len(data) * 8 < nbits:
        raise FormatError("packed integer payload is truncated")
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")[:nbits]
    full = np.zeros((count, 64), dtype=np.uint8)
    full[:, :width] = bits.reshape(count, width)
    return np.packbits(full, axis=1, bitorder="little").view("<u8").reshape(-1).tolist()


class ByteWriter:
    def __init__(self, version: int):
        self._parts: list[bytes] = [struct.pack("<B", version)]

    def u8(self, value: int) -> "ByteWriter":
        self._parts.append(struct.pack("<B", value))
        return self

    def u64(self, value: int) -> "ByteWriter":
        self._parts.append(struct.pack("<Q", value))
        return self

    def f64(self, value: float) -> "ByteWriter":
        self._parts.append(struct.pack("<d", value))
        return self

    def blob(self, data: bytes) -> "ByteWriter":
        self._parts.append(struct.pack("<Q", len(data)))
        self._parts.append(bytes(data))
        return self

    def uints(self, values: Sequence[int], width: int | None = None) -> "ByteWriter":
        if width is None:
            width = width_for(max(values, default=0))
        self.u64(len(values)).u8(width)
        return self.blob(pack_uints(values, width))

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class ByteReader:
    def __init__(self, data: bytes, version: int, what: str):
        self._data = memoryview(data)
        self._pos = 0
        self._what = what
        got = self.u8()
        if got != version:
            raise FormatError(f"{what}: unsupported version {got} (expected {version})")

    def _take(self, size: int) -> memoryview:
        end = self._pos + size
        if end > len(self._data):
            raise FormatError(f"{self._what}: truncated data")
        chunk = self._data[self._pos:end]
        self._pos = end
        return chunk

    def u8(self) -> int:
        return self._take(1)[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def blob(self) -> bytes:
        return bytes(self._take(self.u64()))

    def uints(self) -> list[int]:
        count = self.u64()
        width = self.u8()
        return unpack_uints(self.blob(), width, count)

    def done(self) -> None:
        if self._pos != len(self._data):
            raise FormatError(f"{self._what}: {len(self._data) - self._pos} trailing bytes")
