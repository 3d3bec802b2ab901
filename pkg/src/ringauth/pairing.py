"""Type-3 bilinear pairing engine.

Wraps a compiled BLS12-381 backend behind profile-agnostic element classes,
hash-to-group functions and canonical serialization. Curve arithmetic is not
implemented here; this module owns byte conventions, scalar sampling, the
key-derivation function and the pairing-evaluation counter.

Scalars are plain Python integers modulo the group order ``ORDER``. Group
elements are immutable; their compressed encodings are cached after first
use. Deserialization always validates subgroup membership, so any element
object in memory is a valid subgroup member.
"""

from __future__ import annotations

import hashlib
import threading
from contextlib import contextmanager
from dataclasses import dataclass

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import (
    InvalidEncodingError,
    OffSubgroupError,
    UnknownProfileError,
    WrongLengthError,
)
from .rng import Rng

try:
    from . import _pairing_native as _native
except ImportError as exc:  # pragma: no cover
    raise ImportError(
        "ringauth._pairing_native is missing; build it with "
        "`pip install -e . --no-build-isolation` (requires a Rust toolchain)"
    ) from exc

ORDER = int(_native.ORDER, 16)

G1_LEN = _native.G1_LEN
G2_LEN = _native.G2_LEN
GT_LEN = _native.GT_LEN
SCALAR_LEN = 32

DST_G1 = b"RINGAUTH-V01-H1-BLS12381G1_XMD:SHA-256_SSWU_RO_"
DST_G2 = b"RINGAUTH-V01-H2-BLS12381G2_XMD:SHA-256_SSWU_RO_"
DST_SCALAR = b"RINGAUTH-V01-HS-SCALAR_XMD:SHA-256"


@dataclass(frozen=True)
class CurveProfile:
    """Byte lengths and security level for one curve setting.

    Profiles without a backend exist only for size bookkeeping (the wire and
    size model can be evaluated against their element lengths).
    """

    name: str
    g1_len: int
    g2_len: int
    gt_len: int
    scalar_len: int
    security_bits: int
    has_backend: bool


PROFILES: dict[str, CurveProfile] = {
    "bls12-381": CurveProfile("bls12-381", G1_LEN, G2_LEN, GT_LEN, SCALAR_LEN, 120, True),
    # Historical reference profile: 159-bit base field, serialized sizes as
    # reported for that setting (30-byte compressed G1). No backend.
    "mnt159-ref": CurveProfile("mnt159-ref", 30, 60, 119, 20, 70, False),
}

DEFAULT_PROFILE = "bls12-381"


def get_profile(name: str) -> CurveProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise UnknownProfileError(f"unknown curve profile: {name!r}") from None


_NATIVE_ERRORS = {
    "wrong-length": WrongLengthError,
    "invalid-encoding": InvalidEncodingError,
    "off-subgroup": OffSubgroupError,
}


def _decode_call(native_from_bytes, data: bytes):
    try:
        return native_from_bytes(bytes(data))
    except ValueError as exc:
        code = str(exc)
        raise _NATIVE_ERRORS.get(code, InvalidEncodingError)(code) from None


def _wide(x: int) -> bytes:
    return (x % ORDER).to_bytes(64, "little")


class _Element:
    """Common behaviour for the three group element wrappers."""

    __slots__ = ("_el", "_bytes")

    _native_cls = None
    _byte_len = 0

    def __init__(self, el):
        self._el = el
        self._bytes = None

    @classmethod
    def _wrap(cls, el):
        return cls(el)

    @classmethod
    def from_bytes(cls, data: bytes):
        el = _decode_call(cls._native_cls.from_bytes, data)
        obj = cls(el)
        obj._bytes = bytes(data)
        return obj

    def to_bytes(self) -> bytes:
        if self._bytes is None:
            self._bytes = bytes(self._el.to_bytes())
        return self._bytes

    def is_identity(self) -> bool:
        return self._el.is_identity()

    def __eq__(self, other):
        if not isinstance(other, type(self)):
            return NotImplemented
        return self._el.equals(other._el)

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return f"{type(self).__name__}({self.to_bytes().hex()[:16]}...)"


class G1Element(_Element):
    _native_cls = _native.G1El
    _byte_len = G1_LEN

    @classmethod
    def generator(cls) -> "G1Element":
        return cls(_native.G1El.generator())

    @classmethod
    def identity(cls) -> "G1Element":
        return cls(_native.G1El.identity())

    def __add__(self, other: "G1Element") -> "G1Element":
        return G1Element(self._el.add(other._el))

    def __neg__(self) -> "G1Element":
        return G1Element(self._el.neg())

    def __sub__(self, other: "G1Element") -> "G1Element":
        return G1Element(self._el.add(other._el.neg()))

    def __mul__(self, scalar: int) -> "G1Element":
        return G1Element(self._el.mul(_wide(scalar)))

    __rmul__ = __mul__

    def mul_vartime(self, scalar: int) -> "G1Element":
        """Faster, variable-time multiplication. Public scalars only."""
        return G1Element(self._el.mul_vartime(_wide(scalar)))


class G2Element(_Element):
    _native_cls = _native.G2El
    _byte_len = G2_LEN

    @classmethod
    def generator(cls) -> "G2Element":
        return cls(_native.G2El.generator())

    @classmethod
    def identity(cls) -> "G2Element":
        return cls(_native.G2El.identity())

    def __add__(self, other: "G2Element") -> "G2Element":
        return G2Element(self._el.add(other._el))

    def __neg__(self) -> "G2Element":
        return G2Element(self._el.neg())

    def __mul__(self, scalar: int) -> "G2Element":
        return G2Element(self._el.mul(_wide(scalar)))

    __rmul__ = __mul__

    def prepare(self) -> "G2Prepared":
        return G2Prepared(self)


class G2Prepared:
    """Cached Miller-loop precomputation for a fixed right-hand pairing input."""

    __slots__ = ("_prep",)

    def __init__(self, element: G2Element):
        self._prep = element._el.prepare()


class GtElement(_Element):
    """Element of the pairing target group, written multiplicatively."""

    _native_cls = _native.GtEl
    _byte_len = GT_LEN

    @classmethod
    def generator(cls) -> "GtElement":
        return cls(_native.GtEl.generator())

    @classmethod
    def identity(cls) -> "GtElement":
        return cls(_native.GtEl.identity())

    def __mul__(self, other: "GtElement") -> "GtElement":
        return GtElement(self._el.combine(other._el))

    def __pow__(self, exponent: int) -> "GtElement":
        return GtElement(self._el.exp(_wide(exponent)))

    def inverse(self) -> "GtElement":
        return GtElement(self._el.inv())


# -- pairing evaluation, instrumented ---------------------------------------

_counter_lock = threading.Lock()
_pairing_evals = 0


def pairing_count() -> int:
    """Total Miller-loop evaluations since import."""
    return _pairing_evals


def _count(n: int) -> None:
    global _pairing_evals
    with _counter_lock:
        _pairing_evals += n


class _CounterWindow:
    def __init__(self, start: int):
        self._start = start
        self._end: int | None = None

    @property
    def count(self) -> int:
        end = self._end if self._end is not None else _pairing_evals
        return end - self._start


@contextmanager
def count_pairings():
    """Context manager exposing the number of pairings evaluated inside it."""
    window = _CounterWindow(_pairing_evals)
    try:
        yield window
    finally:
        window._end = _pairing_evals


def pair(a: G1Element, b: G2Element) -> GtElement:
    """Bilinear map e(a, b). Counts as one pairing evaluation."""
    _count(1)
    return GtElement(_native.pair(a._el, b._el))


def multi_pair(terms: list[tuple[G1Element, G2Prepared]]) -> GtElement:
    """Product of pairings with one shared final exponentiation.

    Counts len(terms) pairing evaluations: each term runs its own Miller loop.
    """
    _count(len(terms))
    g1s = [a._el for a, _ in terms]
    preps = [b._prep for _, b in terms]
    return GtElement(_native.multi_pair(g1s, preps))


def g1_sum(elements: list[G1Element]) -> G1Element:
    if not elements:
        return G1Element.identity()
    return G1Element(_native.G1El.sum([e._el for e in elements]))


def g1_msm(points: list[G1Element], scalars: list[int]) -> G1Element:
    """Multi-scalar multiplication: sum of scalar_i * point_i.

    Variable time; meant for verification-side aggregation where points and
    scalars are public. Use element-wise ``*`` for secret scalars.
    """
    if len(points) != len(scalars):
        raise ValueError("msm length mismatch")
    if not points:
        return G1Element.identity()
    return G1Element(
        _native.G1El.msm_vartime([p._el for p in points], [_wide(s) for s in scalars])
    )


# -- hashing and key derivation ----------------------------------------------


def hash_to_g1(data: bytes, dst: bytes = DST_G1) -> G1Element:
    return G1Element(_native.G1El.hash_to_curve(bytes(data), dst))


def hash_to_g2(data: bytes, dst: bytes = DST_G2) -> G2Element:
    return G2Element(_native.G2El.hash_to_curve(bytes(data), dst))


def expand_message_xmd(msg: bytes, dst: bytes, out_len: int) -> bytes:
    """RFC 9380 expand_message_xmd with SHA-256."""
    if len(dst) > 255:
        raise ValueError("domain separation tag too long")
    ell = (out_len + 31) // 32
    if ell > 255:
        raise ValueError("requested output too long")
    dst_prime = dst + bytes([len(dst)])
    b0 = hashlib.sha256(b"\x00" * 64 + msg + out_len.to_bytes(2, "big") + b"\x00" + dst_prime).digest()
    blocks = [hashlib.sha256(b0 + b"\x01" + dst_prime).digest()]
    for i in range(2, ell + 1):
        mixed = bytes(x ^ y for x, y in zip(b0, blocks[-1]))
        blocks.append(hashlib.sha256(mixed + bytes([i]) + dst_prime).digest())
    return b"".join(blocks)[:out_len]


def hash_to_scalar(data: bytes, dst: bytes = DST_SCALAR) -> int:
    """Deterministic nonzero scalar modulo the group order.

    A 48-byte expansion keeps the mod-q bias below 2^-128. Zero output is
    re-derived with a counter suffix (practically unreachable).
    """
    counter = 0
    msg = bytes(data)
    while True:
        value = int.from_bytes(expand_message_xmd(msg, dst, 48), "big") % ORDER
        if value != 0:
            return value
        counter += 1
        msg = bytes(data) + b"|retry|" + counter.to_bytes(4, "big")


def kdf(element: GtElement, out_len: int, label: bytes = b"ringauth-kdf") -> bytes:
    """Variable-length key derivation from a pairing value (HKDF-SHA256)."""
    return HKDF(algorithm=hashes.SHA256(), length=out_len, salt=None, info=label).derive(
        element.to_bytes()
    )


def rand_scalar(rng: Rng, nonzero: bool = True) -> int:
    """Uniform scalar by rejection sampling; nonzero by default."""
    while True:
        raw = bytearray(rng.randbytes(32))
        raw[0] &= 0x7F  # trim to 255 bits so roughly half the draws land below q
        value = int.from_bytes(bytes(raw), "big")
        if value >= ORDER:
            continue
        if nonzero and value == 0:
            continue
        return value
