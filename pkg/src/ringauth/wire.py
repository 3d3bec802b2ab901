"""Canonical wire formats: broadcast envelopes and protocol frames.

Envelope layout (big-endian integers, fixed-width group encodings)::

    u32 len | message |
    u16 n   | n * G1 (signature U values) | G1 (signature V) |
    u16 n   | n * G1 (ring pseudonyms) |
    u64 timestamp | Gt (trace tag)

The signature and ring counts are encoded separately so a mismatch is
representable and rejected. Frames wrap one protocol message as
``u8 type | u32 payload length | payload``.

Decoding validates every group element (subgroup membership included), so a
decoded object is structurally sound.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import channel, pairing
from .encoding import Reader, lv, u8, u16, u32, u64
from .errors import ChannelError, RingError, SerializationError, WireFormatError
from .scheme import (
    BroadcastEnvelope,
    IbeCiphertext,
    RingSignature,
    SignerRing,
    TraceTag,
)

FRAME_RID_BROADCAST = 1
FRAME_RING_REQUEST = 2
FRAME_SEALED_LIST = 3
FRAME_ENVELOPE = 4
FRAME_TRACE_REQUEST = 5
FRAME_TRACE_RESPONSE = 6


def encode_envelope(env: BroadcastEnvelope) -> bytes:
    parts = [lv(env.message), u16(len(env.signature.u))]
    parts.extend(u.to_bytes() for u in env.signature.u)
    parts.append(env.signature.v.to_bytes())
    parts.append(u16(len(env.ring)))
    parts.append(env.ring.encode())
    parts.append(u64(env.timestamp))
    parts.append(env.tag.value.to_bytes())
    return b"".join(parts)


def decode_envelope(data: bytes) -> BroadcastEnvelope:
    r = Reader(data)
    message = r.lv()
    n_sig = r.u16()
    us = tuple(pairing.G1Element.from_bytes(r.take(pairing.G1_LEN)) for _ in range(n_sig))
    v = pairing.G1Element.from_bytes(r.take(pairing.G1_LEN))
    n_ring = r.u16()
    if n_ring != n_sig:
        raise WireFormatError("signature and ring counts differ")
    pids = [pairing.G1Element.from_bytes(r.take(pairing.G1_LEN)) for _ in range(n_ring)]
    timestamp = r.u64()
    tag = pairing.GtElement.from_bytes(r.take(pairing.GT_LEN))
    r.expect_end()
    try:
        ring = SignerRing(pids)
    except RingError as exc:
        raise WireFormatError("invalid ring in envelope") from exc
    return BroadcastEnvelope(message, RingSignature(us, v), ring, timestamp, TraceTag(tag))


def envelope_size(profile: pairing.CurveProfile, ring_size: int, message_len: int) -> int:
    """Closed-form envelope length for a profile; matches encode_envelope
    byte-for-byte on the backend profile."""
    framing = 4 + 2 + 2 + 8
    signature = (ring_size + 1) * profile.g1_len
    ring = ring_size * profile.g1_len
    return framing + message_len + signature + ring + profile.gt_len


def signature_size(profile: pairing.CurveProfile, ring_size: int) -> int:
    """Serialized ring signature: count prefix plus ring_size + 1 G1 points."""
    return 2 + (ring_size + 1) * profile.g1_len


# -- protocol messages ---------------------------------------------------------


@dataclass(frozen=True)
class RidBroadcast:
    rsu_id: str
    rid: pairing.G2Element


@dataclass(frozen=True)
class RingRequest:
    ciphertext: IbeCiphertext


@dataclass(frozen=True)
class SealedListMsg:
    sealed: channel.SealedRingList


@dataclass(frozen=True)
class EnvelopeMsg:
    envelope: BroadcastEnvelope


@dataclass(frozen=True)
class TraceRequest:
    pids: tuple[pairing.G1Element, ...]
    timestamp: int


@dataclass(frozen=True)
class TraceResponse:
    candidates: tuple[tuple[str, pairing.GtElement], ...]


Message = RidBroadcast | RingRequest | SealedListMsg | EnvelopeMsg | TraceRequest | TraceResponse


def encode_frame(msg: Message) -> bytes:
    if isinstance(msg, RidBroadcast):
        ftype, payload = FRAME_RID_BROADCAST, lv(msg.rsu_id.encode()) + msg.rid.to_bytes()
    elif isinstance(msg, RingRequest):
        ftype = FRAME_RING_REQUEST
        payload = msg.ciphertext.u.to_bytes() + lv(msg.ciphertext.v)
    elif isinstance(msg, SealedListMsg):
        ftype, payload = FRAME_SEALED_LIST, msg.sealed.to_bytes()
    elif isinstance(msg, EnvelopeMsg):
        ftype, payload = FRAME_ENVELOPE, encode_envelope(msg.envelope)
    elif isinstance(msg, TraceRequest):
        ftype = FRAME_TRACE_REQUEST
        payload = (
            u16(len(msg.pids))
            + b"".join(p.to_bytes() for p in msg.pids)
            + u64(msg.timestamp)
        )
    elif isinstance(msg, TraceResponse):
        ftype = FRAME_TRACE_RESPONSE
        payload = u16(len(msg.candidates)) + b"".join(
            lv(vid.encode()) + h.to_bytes() for vid, h in msg.candidates
        )
    else:
        raise TypeError(f"not a protocol message: {type(msg).__name__}")
    return u8(ftype) + u32(len(payload)) + payload


def decode_frame(data: bytes) -> Message:
    r = Reader(data)
    ftype = r.u8()
    payload = r.lv()
    r.expect_end()
    body = Reader(payload)
    try:
        if ftype == FRAME_RID_BROADCAST:
            rsu_id = body.lv().decode()
            rid = pairing.G2Element.from_bytes(body.take(pairing.G2_LEN))
            body.expect_end()
            return RidBroadcast(rsu_id, rid)
        if ftype == FRAME_RING_REQUEST:
            u = pairing.G1Element.from_bytes(body.take(pairing.G1_LEN))
            v = body.lv()
            body.expect_end()
            return RingRequest(IbeCiphertext(u, v))
        if ftype == FRAME_SEALED_LIST:
            return SealedListMsg(channel.SealedRingList.from_bytes(payload))
        if ftype == FRAME_ENVELOPE:
            return EnvelopeMsg(decode_envelope(payload))
        if ftype == FRAME_TRACE_REQUEST:
            n = body.u16()
            pids = tuple(
                pairing.G1Element.from_bytes(body.take(pairing.G1_LEN)) for _ in range(n)
            )
            timestamp = body.u64()
            body.expect_end()
            return TraceRequest(pids, timestamp)
        if ftype == FRAME_TRACE_RESPONSE:
            n = body.u16()
            candidates = []
            for _ in range(n):
                vid = body.lv().decode()
                h = pairing.GtElement.from_bytes(body.take(pairing.GT_LEN))
                candidates.append((vid, h))
            body.expect_end()
            return TraceResponse(tuple(candidates))
    except (SerializationError, ChannelError, UnicodeDecodeError) as exc:
        raise WireFormatError(f"bad frame payload (type {ftype})") from exc
    raise WireFormatError(f"unknown frame type {ftype}")
