"""Protocol entities: registration authority, roadside units, vehicles and
the tracing authority.

Each entity owns its state and interacts through the message types in
``wire``; the simulator moves those messages as frames, and tests may call
the methods directly. Timestamps are unix seconds.

The vehicle's signing keys live inside a sealed sub-object that models a
hardware security module: signing and shared-key derivation happen inside
it and neither the vehicle secret nor symmetric key bytes are reachable
from the outside.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from . import channel, scheme, wire
from .errors import (
    ChannelDecryptError,
    DecryptionError,
    DuplicateIdentityError,
    ExpiredRingListError,
    InsufficientRingError,
    MacError,
    TraceIntegrityError,
    UnknownIdentityError,
)
from .pairing import G1Element, GtElement
from .rng import Rng, SystemRng, sample, shuffle
from .scheme import (
    BroadcastEnvelope,
    MasterSecret,
    PublicParams,
    RingList,
    SignerRing,
    TraceSecret,
    VehicleCredential,
)


@dataclass(frozen=True)
class ProtocolConfig:
    """Tunable protocol policy. Times are in seconds."""

    freshness_window: int = 5
    prl_refresh_period: int = 60
    ring_list_lifetime: int = 120
    decoy_floor: int = 32
    default_ring_size: int = 2
    batch_exponent_bits: int = 64


DEFAULT_CONFIG = ProtocolConfig()


@dataclass(frozen=True)
class ReceiveResult:
    accepted: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.accepted


@dataclass(frozen=True)
class RingRequestOutcome:
    granted: bool
    reason: str = ""
    response: wire.SealedListMsg | None = None


@dataclass(frozen=True)
class BatchReceiveResult:
    """Outcome of batch reception: per-envelope filtering plus one batched
    verification decision over the surviving envelopes."""

    accepted: bool
    filtered: tuple[tuple[int, str], ...]
    checked: tuple[int, ...]
    reason: str = ""


class Trc:
    """Registration authority: issues credentials, keeps the identity
    registry and the pseudonym revocation list, and answers trace queries."""

    def __init__(
        self,
        pp: PublicParams,
        master: MasterSecret,
        config: ProtocolConfig = DEFAULT_CONFIG,
    ):
        self.pp = pp
        self._master = master
        self.config = config
        self._vehicles: dict[str, G1Element] = {}
        self._pid_index: dict[bytes, str] = {}
        self._rsus: dict[str, scheme.RsuCredential] = {}
        self._prl: set[bytes] = set()
        self._decoys: list[G1Element] = []
        for i in range(config.decoy_floor):
            cred = self.register_vehicle(f"decoy/{i:04d}")
            self._decoys.append(cred.pid)

    def register_vehicle(self, vid: str) -> VehicleCredential:
        if vid in self._vehicles:
            raise DuplicateIdentityError(f"vehicle {vid!r} already registered")
        cred = scheme.keygen_vehicle(self._master, vid)
        key = cred.pid.to_bytes()
        if key in self._pid_index:
            raise DuplicateIdentityError("pseudonym collision in registry")
        self._vehicles[vid] = cred.pid
        self._pid_index[key] = vid
        return cred

    def register_rsu(self, rsu_id: str) -> scheme.RsuCredential:
        if rsu_id in self._rsus:
            raise DuplicateIdentityError(f"rsu {rsu_id!r} already registered")
        cred = scheme.keygen_rsu(self._master, rsu_id)
        self._rsus[rsu_id] = cred
        return cred

    def revoke(self, vid: str) -> frozenset[bytes]:
        """Move a vehicle's pseudonym onto the revocation list (idempotent)."""
        if vid not in self._vehicles:
            raise UnknownIdentityError(f"cannot revoke unregistered vehicle {vid!r}")
        self._prl.add(self._vehicles[vid].to_bytes())
        return frozenset(self._prl)

    def prl(self) -> frozenset[bytes]:
        return frozenset(self._prl)

    def decoy_pids(self) -> tuple[G1Element, ...]:
        return tuple(self._decoys)

    def registry_view(self) -> dict[bytes, str]:
        """Compressed pseudonym to identity mapping (trace side)."""
        return dict(self._pid_index)

    def is_registered(self, vid: str) -> bool:
        return vid in self._vehicles

    def handle_trace_request(self, request: wire.TraceRequest) -> wire.TraceResponse:
        candidates = scheme.trace_candidates(
            self._pid_index, request.pids, request.timestamp
        )
        return wire.TraceResponse(tuple(candidates))


class Rsu:
    """Roadside unit: answers ring-list requests from vehicles in its region,
    refreshing the revocation list from the authority periodically."""

    def __init__(
        self,
        credential: scheme.RsuCredential,
        pp: PublicParams,
        trc: Trc,
        config: ProtocolConfig = DEFAULT_CONFIG,
        rng: Rng | None = None,
    ):
        self.rsu_id = credential.rsu_id
        self.rid = credential.rid
        self._rsk = credential.rsk
        self.pp = pp
        self._trc = trc
        self.config = config
        self._rng = rng or SystemRng()
        self._prl: frozenset[bytes] = frozenset()
        self._decoys: tuple[G1Element, ...] = ()
        self._prl_fetched_at: int | None = None
        self._key_cache: dict[bytes, channel.SymmetricKey] = {}
        self._requesters: dict[bytes, G1Element] = {}
        self._list_expiry = 0

    def rid_broadcast(self) -> wire.RidBroadcast:
        return wire.RidBroadcast(self.rsu_id, self.rid)

    def refresh_prl(self, now: int) -> None:
        """Pull revocations and decoys; purge state held for revoked vehicles."""
        self._prl = self._trc.prl()
        self._decoys = self._trc.decoy_pids()
        self._prl_fetched_at = now
        self._list_expiry = now + self.config.ring_list_lifetime
        for pid_bytes in list(self._key_cache):
            if pid_bytes in self._prl:
                del self._key_cache[pid_bytes]
        for pid_bytes in list(self._requesters):
            if pid_bytes in self._prl:
                del self._requesters[pid_bytes]

    def _maybe_refresh(self, now: int) -> None:
        if (
            self._prl_fetched_at is None
            or now - self._prl_fetched_at >= self.config.prl_refresh_period
        ):
            self.refresh_prl(now)

    def _current_list(self) -> list[G1Element]:
        members: dict[bytes, G1Element] = {}
        for pid in self._decoys:
            members.setdefault(pid.to_bytes(), pid)
        for key, pid in self._requesters.items():
            members.setdefault(key, pid)
        for revoked in self._prl:
            members.pop(revoked, None)
        return [members[k] for k in sorted(members)]

    def handle_ring_request(self, request: wire.RingRequest, now: int) -> RingRequestOutcome:
        """Decrypt the requester's pseudonym, check revocation, then seal the
        current ring list under the shared key."""
        self._maybe_refresh(now)
        try:
            pid = scheme.ibe_decrypt(self.pp, self._rsk, request.ciphertext)
        except DecryptionError:
            return RingRequestOutcome(False, "decrypt-failure")
        key_bytes = pid.to_bytes()
        if key_bytes in self._prl:
            return RingRequestOutcome(False, "revoked")
        key = self._key_cache.get(key_bytes)
        if key is None:
            key = scheme.derive_shared_key_rsu(self._rsk, pid)
            self._key_cache[key_bytes] = key
        self._requesters[key_bytes] = pid
        sealed = channel.seal_ring_list(key, self._current_list(), self._list_expiry, self._rng)
        return RingRequestOutcome(True, "", wire.SealedListMsg(sealed))


class _Hsm:
    """Software stand-in for the on-board security module. The credential and
    derived symmetric keys never leave this object."""

    def __init__(self, credential: VehicleCredential, pp: PublicParams):
        self.__cred = credential
        self.__pp = pp
        self.__keys: dict[bytes, channel.SymmetricKey] = {}

    def pid(self) -> G1Element:
        return self.__cred.pid

    def _key_for(self, rid) -> channel.SymmetricKey:
        cache_key = rid.to_bytes()
        if cache_key not in self.__keys:
            self.__keys[cache_key] = scheme.derive_shared_key_vehicle(self.__cred.psk, rid)
        return self.__keys[cache_key]

    def open_sealed_list(self, rid, sealed: channel.SealedRingList):
        return channel.open_ring_list(self._key_for(rid), sealed)

    def encrypt_pid_to(self, rid, rng: Rng) -> scheme.IbeCiphertext:
        return scheme.ibe_encrypt(self.__pp, rid, self.__cred.pid, rng)

    def make_envelope(
        self,
        ring: SignerRing,
        signer_index: int,
        message: bytes,
        now: int,
        rng: Rng,
    ) -> BroadcastEnvelope:
        tag = scheme.make_tag(self.__pp, self.__cred.vid, now)
        sig = scheme.ring_sign(
            self.__pp, self.__cred, ring, signer_index, message, now, tag, rng
        )
        return BroadcastEnvelope(message, sig, ring, now, tag)


class Vehicle:
    """On-board unit state machine: ring acquisition, signing, reception."""

    def __init__(
        self,
        credential: VehicleCredential,
        pp: PublicParams,
        config: ProtocolConfig = DEFAULT_CONFIG,
    ):
        self.pp = pp
        self.config = config
        self._hsm = _Hsm(credential, pp)
        self._ring_list: RingList | None = None
        self._ring_expiry = 0
        self._pending_rid = None
        self._replay_cache: dict[bytes, int] = {}

    @property
    def pid(self) -> G1Element:
        return self._hsm.pid()

    def has_ring(self) -> bool:
        return self._ring_list is not None

    def ring_expiry(self) -> int:
        return self._ring_expiry

    # -- ring acquisition ------------------------------------------------

    def request_ring(self, broadcast: wire.RidBroadcast, rng: Rng) -> wire.RingRequest:
        """React to an RSU presence broadcast with an encrypted pseudonym."""
        self._pending_rid = broadcast.rid
        return wire.RingRequest(self._hsm.encrypt_pid_to(broadcast.rid, rng))

    def accept_sealed_list(self, msg: wire.SealedListMsg, now: int) -> ReceiveResult:
        """Authenticate, decrypt and adopt a ring list; on any failure the
        previous list is kept unchanged."""
        if self._pending_rid is None:
            return ReceiveResult(False, "no-pending-request")
        try:
            pids = self._hsm.open_sealed_list(self._pending_rid, msg.sealed)
        except MacError:
            return ReceiveResult(False, "mac-failure")
        except ChannelDecryptError:
            return ReceiveResult(False, "decrypt-failure")
        if msg.sealed.expiry <= now:
            return ReceiveResult(False, "expired-list")
        self._ring_list = RingList(pids)
        self._ring_expiry = msg.sealed.expiry
        self._pending_rid = None
        return ReceiveResult(True)

    def acquire_ring(self, rsu: Rsu, now: int, rng: Rng) -> ReceiveResult:
        """Full acquisition handshake against an in-process RSU."""
        request = self.request_ring(rsu.rid_broadcast(), rng)
        outcome = rsu.handle_ring_request(request, now)
        if not outcome.granted:
            return ReceiveResult(False, outcome.reason)
        return self.accept_sealed_list(outcome.response, now)

    # -- broadcasting ------------------------------------------------------

    def broadcast(
        self, message: bytes, now: int, rng: Rng, ring_size: int | None = None
    ) -> BroadcastEnvelope:
        """Sign a message under a fresh ring drawn from the held list.

        The ring is the vehicle's own pseudonym plus ring_size - 1 distinct
        random picks, in randomized order.
        """
        n = ring_size or self.config.default_ring_size
        if self._ring_list is None:
            raise ExpiredRingListError("no ring list held")
        if now > self._ring_expiry:
            raise ExpiredRingListError("held ring list has expired")
        own = self.pid
        own_bytes = own.to_bytes()
        others = [p for p in self._ring_list if p.to_bytes() != own_bytes]
        if n - 1 > len(others):
            raise InsufficientRingError(
                f"ring size {n} exceeds available pseudonyms ({len(others)} + self)"
            )
        members = [own] + sample(rng, others, n - 1)
        shuffle(rng, members)
        ring = SignerRing(members)
        env = self._hsm.make_envelope(ring, ring.index_of(own), message, now, rng)
        # remember own broadcasts so reflected replays are rejected too
        self._replay_cache[self._envelope_digest(env)] = env.timestamp
        return env

    # -- receiving ---------------------------------------------------------

    def _evict_replay(self, now: int) -> None:
        window = self.config.freshness_window
        for key, ts in list(self._replay_cache.items()):
            if abs(now - ts) > window:
                del self._replay_cache[key]

    def _envelope_digest(self, env: BroadcastEnvelope) -> bytes:
        return hashlib.sha256(wire.encode_envelope(env)).digest()

    def receive(self, env: BroadcastEnvelope, now: int) -> ReceiveResult:
        """Freshness and replay checks run before any pairing; accepted
        envelopes enter the replay cache."""
        self._evict_replay(now)
        if abs(now - env.timestamp) > self.config.freshness_window:
            return ReceiveResult(False, "stale")
        digest = self._envelope_digest(env)
        if digest in self._replay_cache:
            return ReceiveResult(False, "replay")
        result = scheme.verify_single(self.pp, env)
        if not result.ok:
            return ReceiveResult(False, f"invalid-{result.reason.value}")
        self._replay_cache[digest] = env.timestamp
        return ReceiveResult(True)

    def receive_batch(
        self, envs: list[BroadcastEnvelope], now: int, rng: Rng
    ) -> BatchReceiveResult:
        """Filter stale and replayed envelopes, then batch-verify the rest."""
        self._evict_replay(now)
        filtered: list[tuple[int, str]] = []
        survivors: list[tuple[int, BroadcastEnvelope, bytes]] = []
        for idx, env in enumerate(envs):
            if abs(now - env.timestamp) > self.config.freshness_window:
                filtered.append((idx, "stale"))
                continue
            digest = self._envelope_digest(env)
            if digest in self._replay_cache:
                filtered.append((idx, "replay"))
                continue
            survivors.append((idx, env, digest))
        if not survivors:
            return BatchReceiveResult(False, tuple(filtered), (), "nothing-to-verify")
        result = scheme.verify_batch(
            self.pp,
            [env for _, env, _ in survivors],
            rng,
            security_exponent_bits=self.config.batch_exponent_bits,
        )
        checked = tuple(idx for idx, _, _ in survivors)
        if not result.ok:
            return BatchReceiveResult(False, tuple(filtered), checked, "batch-reject")
        for _, env, digest in survivors:
            self._replay_cache[digest] = env.timestamp
        return BatchReceiveResult(True, tuple(filtered), checked)


class Lea:
    """Tracing authority: opens tags and resolves signers with the registry
    held by the registration authority."""

    def __init__(self, trace: TraceSecret, pp: PublicParams):
        self._trace = trace
        self.pp = pp

    def open_tag(self, env: BroadcastEnvelope) -> GtElement:
        return scheme.trace_open(self._trace, env.tag)

    def trace(self, env: BroadcastEnvelope, trc: Trc) -> str | None:
        """Two-message protocol: send ring and timestamp, compare the opened
        tag against the returned per-identity reference values."""
        opened = self.open_tag(env)
        request = wire.TraceRequest(env.ring.pids, env.timestamp)
        response = trc.handle_trace_request(request)
        matches = [vid for vid, h in response.candidates if h == opened]
        if not matches:
            return None
        if len(matches) > 1:
            raise TraceIntegrityError("opened tag matched multiple identities")
        return matches[0]


def lea_trace(lea: Lea, trc: Trc, env: BroadcastEnvelope) -> str | None:
    """Convenience wrapper for the two-party trace protocol."""
    return lea.trace(env, trc)


def bootstrap(
    rng: Rng,
    profile_name: str = "bls12-381",
    config: ProtocolConfig = DEFAULT_CONFIG,
) -> tuple[Trc, Lea]:
    """Stand up the authorities: one registration authority holding the
    issuing secret, one tracing authority holding the tag-opening secret."""
    pp, master, trace = scheme.setup(rng, profile_name)
    return Trc(pp, master, config), Lea(trace, pp)
