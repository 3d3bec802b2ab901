"""Low-level byte packing shared by hash preimages and wire formats.

Every variable-length component is length-prefixed (u32 big-endian) so that
concatenated fields can never be re-split a second way.
"""

from __future__ import annotations

import struct

from .errors import WireFormatError


def u8(x: int) -> bytes:
    return struct.pack(">B", x)


def u16(x: int) -> bytes:
    return struct.pack(">H", x)


def u32(x: int) -> bytes:
    return struct.pack(">I", x)


def u64(x: int) -> bytes:
    return struct.pack(">Q", x)


def lv(data: bytes) -> bytes:
    """Length-value: u32 length prefix followed by the raw bytes."""
    return struct.pack(">I", len(data)) + data


class Reader:
    """Sequential reader that raises WireFormatError instead of slicing short."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self._pos + n > len(self._data):
            raise WireFormatError("truncated input")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def lv(self) -> bytes:
        return self.take(self.u32())

    def remaining(self) -> int:
        return len(self._data) - self._pos

    def expect_end(self) -> None:
        if self._pos != len(self._data):
            raise WireFormatError("trailing bytes")
