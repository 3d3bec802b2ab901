"""Randomness sources.

Every operation that needs randomness takes an explicit generator so the
simulator can replay runs bit-for-bit from a seed. ``SystemRng`` is the
production source; ``DrbgRng`` is a deterministic SHA-256 counter generator.
"""

from __future__ import annotations

import hashlib
import os
from typing import Protocol, Sequence, TypeVar


class Rng(Protocol):
    def randbytes(self, n: int) -> bytes: ...


class SystemRng:
    """Operating-system CSPRNG."""

    def randbytes(self, n: int) -> bytes:
        return os.urandom(n)


class DrbgRng:
    """Deterministic byte stream: SHA-256 over (seed digest, block counter)."""

    def __init__(self, seed: int | bytes | str):
        if isinstance(seed, int):
            seed = seed.to_bytes(16, "big", signed=False) if seed >= 0 else str(seed).encode()
        elif isinstance(seed, str):
            seed = seed.encode()
        self._state = hashlib.sha256(b"ringauth-drbg" + seed).digest()
        self._counter = 0
        self._buffer = b""

    def randbytes(self, n: int) -> bytes:
        while len(self._buffer) < n:
            block = hashlib.sha256(self._state + self._counter.to_bytes(8, "big")).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def child(self, label: str) -> "DrbgRng":
        """Independent substream, stable under unrelated draws from the parent."""
        return DrbgRng(self._state + label.encode())


def randbelow(rng: Rng, n: int) -> int:
    """Uniform integer in [0, n) by rejection sampling."""
    if n <= 0:
        raise ValueError("randbelow needs a positive bound")
    nbytes = (n.bit_length() + 7) // 8
    limit = (256**nbytes // n) * n
    while True:
        x = int.from_bytes(rng.randbytes(nbytes), "big")
        if x < limit:
            return x % n


T = TypeVar("T")


def sample(rng: Rng, population: Sequence[T], k: int) -> list[T]:
    """k distinct elements, order random."""
    if k > len(population):
        raise ValueError("sample larger than population")
    pool = list(population)
    picked = []
    for _ in range(k):
        idx = randbelow(rng, len(pool))
        picked.append(pool.pop(idx))
    return picked


def shuffle(rng: Rng, items: list[T]) -> None:
    """In-place Fisher-Yates shuffle driven by the injected generator."""
    for i in range(len(items) - 1, 0, -1):
        j = randbelow(rng, i + 1)
        items[i], items[j] = items[j], items[i]
