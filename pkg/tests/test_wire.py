import pytest

from conftest import make_envelope
from ringauth import channel, pairing, scheme, wire
from ringauth.errors import SerializationError, WireFormatError
from ringauth.rng import DrbgRng


class TestEnvelopeCodec:
    def test_roundtrip(self, pp, vehicle_creds, rng):
        for n in (2, 3, 8):
            env = make_envelope(pp, vehicle_creds, rng, ring_size=n)
            raw = wire.encode_envelope(env)
            back = wire.decode_envelope(raw)
            assert wire.encode_envelope(back) == raw
            assert back.message == env.message
            assert back.timestamp == env.timestamp
            assert back.ring.encode() == env.ring.encode()
            assert back.tag.value == env.tag.value
            assert scheme.verify_single(pp, back).ok

    def test_size_model_matches_encoding(self, pp, vehicle_creds, rng):
        profile = pp.profile
        for n, mlen in ((2, 0), (2, 17), (5, 100), (16, 3)):
            env = make_envelope(pp, vehicle_creds, rng, ring_size=n, message=b"z" * mlen)
            assert len(wire.encode_envelope(env)) == wire.envelope_size(profile, n, mlen)

    def test_signature_size_model(self, pp):
        profile = pp.profile
        assert wire.signature_size(profile, 2) == 2 + 3 * profile.g1_len

    def test_truncation_rejected(self, pp, vehicle_creds, rng):
        raw = wire.encode_envelope(make_envelope(pp, vehicle_creds, rng))
        with pytest.raises(WireFormatError):
            wire.decode_envelope(raw[:-1])

    def test_trailing_bytes_rejected(self, pp, vehicle_creds, rng):
        raw = wire.encode_envelope(make_envelope(pp, vehicle_creds, rng))
        with pytest.raises(WireFormatError):
            wire.decode_envelope(raw + b"\x00")

    def test_count_mismatch_rejected(self, pp, vehicle_creds, rng):
        env = make_envelope(pp, vehicle_creds, rng, ring_size=2)
        raw = bytearray(wire.encode_envelope(env))
        # the signature count field lives right after the message block
        offset = 4 + len(env.message)
        raw[offset : offset + 2] = (3).to_bytes(2, "big")
        with pytest.raises(WireFormatError):
            wire.decode_envelope(bytes(raw))

    def test_corrupt_point_rejected(self, pp, vehicle_creds, rng):
        env = make_envelope(pp, vehicle_creds, rng)
        raw = bytearray(wire.encode_envelope(env))
        offset = 4 + len(env.message) + 2  # first signature element
        raw[offset] = 0x00  # clear the compression flag
        with pytest.raises(SerializationError):
            wire.decode_envelope(bytes(raw))


class TestFrames:
    def test_rid_broadcast_roundtrip(self, rsu_cred):
        msg = wire.RidBroadcast(rsu_cred.rsu_id, rsu_cred.rid)
        back = wire.decode_frame(wire.encode_frame(msg))
        assert back.rsu_id == msg.rsu_id and back.rid == msg.rid

    def test_ring_request_roundtrip(self, pp, rsu_cred, vehicle_creds, rng):
        ct = scheme.ibe_encrypt(pp, rsu_cred.rid, vehicle_creds[0].pid, rng)
        back = wire.decode_frame(wire.encode_frame(wire.RingRequest(ct)))
        assert back.ciphertext.u == ct.u and back.ciphertext.v == ct.v

    def test_sealed_list_roundtrip(self, rng):
        key = channel.SymmetricKey(DrbgRng(1).randbytes(32))
        base = pairing.G1Element.generator()
        sealed = channel.seal_ring_list(key, [base, base * 2], 44, rng)
        back = wire.decode_frame(wire.encode_frame(wire.SealedListMsg(sealed)))
        assert back.sealed == sealed

    def test_envelope_frame_roundtrip(self, pp, vehicle_creds, rng):
        env = make_envelope(pp, vehicle_creds, rng)
        back = wire.decode_frame(wire.encode_frame(wire.EnvelopeMsg(env)))
        assert wire.encode_envelope(back.envelope) == wire.encode_envelope(env)

    def test_trace_frames_roundtrip(self, pp, vehicle_creds, rng):
        pids = tuple(c.pid for c in vehicle_creds[:3])
        req = wire.TraceRequest(pids, 91)
        back = wire.decode_frame(wire.encode_frame(req))
        assert back.pids == pids and back.timestamp == 91

        h = pairing.pair(pp.p, pp.q)
        resp = wire.TraceResponse((("veh-a", h), ("veh-b", h**2)))
        back = wire.decode_frame(wire.encode_frame(resp))
        assert back.candidates[0][0] == "veh-a"
        assert back.candidates[1][1] == h**2

    def test_unknown_frame_type(self):
        with pytest.raises(WireFormatError):
            wire.decode_frame(b"\x2a" + (0).to_bytes(4, "big"))

    def test_truncated_frame(self, rsu_cred):
        raw = wire.encode_frame(wire.RidBroadcast(rsu_cred.rsu_id, rsu_cred.rid))
        with pytest.raises(WireFormatError):
            wire.decode_frame(raw[: len(raw) // 2])
