"""Encrypt-then-MAC channel for ring-list delivery.

The symmetric key is the pairing-derived shared secret between a vehicle and
an RSU. Sealing encrypts the pseudonym list with AES-256-CTR, then MACs
ciphertext and expiry with HMAC-SHA256 under an independently derived MAC
subkey. The expiry travels in the clear but is bound by the MAC and echoed
inside the plaintext.

Wire layout of a sealed list (all integers big-endian)::

    u8 version | u8 algorithm id | 16-byte nonce |
    u32 len | ciphertext | u32 len | mac | u64 expiry

MAC input is exactly ``ciphertext || u64(expiry)``.
"""

from __future__ import annotations

import hmac as _hmac
from dataclasses import dataclass
from typing import Sequence

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from . import encoding, pairing
from .errors import (
    ChannelDecryptError,
    ChannelError,
    MacError,
    SerializationError,
    WireFormatError,
)
from .rng import Rng, SystemRng

KEY_LEN = 32
NONCE_LEN = 16
MAC_LEN = 32
VERSION = 1
ALG_AES256CTR_HMACSHA256 = 1


class SymmetricKey:
    """Opaque shared secret. Key bytes are never exposed through the API."""

    __slots__ = ("__key",)

    def __init__(self, key_bytes: bytes):
        if len(key_bytes) != KEY_LEN:
            raise ValueError(f"symmetric key must be {KEY_LEN} bytes")
        self.__key = bytes(key_bytes)

    def _subkey(self, label: bytes) -> bytes:
        return HKDF(algorithm=hashes.SHA256(), length=KEY_LEN, salt=None, info=label).derive(
            self.__key
        )

    def __eq__(self, other):
        if not isinstance(other, SymmetricKey):
            return NotImplemented
        return _hmac.compare_digest(self.__key, other.__key)

    def __hash__(self):
        return hash(self.__key)

    def __repr__(self):
        return "SymmetricKey(<sealed>)"


@dataclass(frozen=True)
class SealedRingList:
    header: bytes
    ciphertext: bytes
    mac: bytes
    expiry: int

    def to_bytes(self) -> bytes:
        return (
            self.header
            + encoding.lv(self.ciphertext)
            + encoding.lv(self.mac)
            + encoding.u64(self.expiry)
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SealedRingList":
        r = encoding.Reader(data)
        header = r.take(2 + NONCE_LEN)
        if header[0] != VERSION or header[1] != ALG_AES256CTR_HMACSHA256:
            raise ChannelError("unsupported sealed-list version or algorithm")
        ciphertext = r.lv()
        mac = r.lv()
        expiry = r.u64()
        r.expect_end()
        return cls(header, ciphertext, mac, expiry)


def _aes_ctr(key: bytes, nonce: bytes, data: bytes) -> bytes:
    cipher = Cipher(algorithms.AES(key), modes.CTR(nonce))
    enc = cipher.encryptor()
    return enc.update(data) + enc.finalize()


def _mac_digest(key: bytes, data: bytes) -> bytes:
    return _hmac.new(key, data, "sha256").digest()


def _encode_list(pids: Sequence[pairing.G1Element], expiry: int) -> bytes:
    out = [encoding.u16(len(pids))]
    out.extend(p.to_bytes() for p in pids)
    out.append(encoding.u64(expiry))
    return b"".join(out)


def _decode_list(plaintext: bytes, expiry: int) -> tuple[pairing.G1Element, ...]:
    r = encoding.Reader(plaintext)
    count = r.u16()
    pids = []
    for _ in range(count):
        pids.append(pairing.G1Element.from_bytes(r.take(pairing.G1_LEN)))
    echoed = r.u64()
    r.expect_end()
    if echoed != expiry:
        raise ChannelDecryptError("expiry mismatch between header and plaintext")
    return tuple(pids)


def seal_ring_list(
    key: SymmetricKey,
    pids: Sequence[pairing.G1Element],
    expiry: int,
    rng: Rng | None = None,
) -> SealedRingList:
    """Encrypt-then-MAC a pseudonym list with its expiry."""
    if not pids:
        raise ValueError("refusing to seal an empty ring list")
    nonce = (rng or SystemRng()).randbytes(NONCE_LEN)
    header = bytes([VERSION, ALG_AES256CTR_HMACSHA256]) + nonce
    ciphertext = _aes_ctr(key._subkey(b"chan-enc"), nonce, _encode_list(pids, expiry))
    mac = _mac_digest(key._subkey(b"chan-mac"), ciphertext + encoding.u64(expiry))
    return SealedRingList(header, ciphertext, mac, expiry)


def open_ring_list(key: SymmetricKey, sealed: SealedRingList) -> tuple[pairing.G1Element, ...]:
    """Verify the MAC, then decrypt and parse. Expiry policy is the caller's.

    Decryption is never attempted when the MAC fails.
    """
    expected = _mac_digest(key._subkey(b"chan-mac"), sealed.ciphertext + encoding.u64(sealed.expiry))
    if not _hmac.compare_digest(expected, sealed.mac):
        raise MacError("sealed ring list failed authentication")
    nonce = sealed.header[2:]
    plaintext = _aes_ctr(key._subkey(b"chan-enc"), nonce, sealed.ciphertext)
    try:
        return _decode_list(plaintext, sealed.expiry)
    except (SerializationError, WireFormatError) as exc:
        raise ChannelDecryptError("recovered plaintext is not a valid ring list") from exc
