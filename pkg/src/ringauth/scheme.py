"""Identity-based ring signature suite with traceable tags.

Implements the full algorithm set used by the vehicular protocol: system
setup, identity key derivation for vehicles (G1 pseudonyms) and roadside
units (G2 keys), identity-based encryption of pseudonyms, pairing-derived
shared keys, ring signing, single and batch verification, and authority-side
tag opening and matching.

Verification never needs more than two pairing evaluations, independent of
ring size and batch size; everything else is group arithmetic in G1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, Sequence

from . import encoding, pairing
from .channel import KEY_LEN, SymmetricKey
from .errors import DecryptionError, RingError, TraceIntegrityError
from .pairing import (
    ORDER,
    CurveProfile,
    G1Element,
    G2Element,
    GtElement,
    g1_msm,
    g1_sum,
    get_profile,
    hash_to_g1,
    hash_to_g2,
    hash_to_scalar,
    kdf,
    multi_pair,
    pair,
    rand_scalar,
)
from .rng import Rng

_IBE_MASK_LABEL = b"ringauth-ibe-mask"
_SHARED_KEY_LABEL = b"ringauth-shared-key"
_CHALLENGE_DST = b"RINGAUTH-V01-RING-CHALLENGE"


class PublicParams:
    """System-wide parameters shared by every entity.

    Holds the two generators, the authority public keys (PK1 = s*P in G1,
    PK2 = s*Q in G2) and the tracing public key (s_trac * Q). The prepared
    forms of the G2 inputs used by verification are cached here.
    """

    __slots__ = ("profile", "p", "q", "pk1", "pk2", "pk_trac", "hash_suite", "_pk2_prep", "_q_prep")

    def __init__(
        self,
        profile: CurveProfile,
        p: G1Element,
        q: G2Element,
        pk1: G1Element,
        pk2: G2Element,
        pk_trac: G2Element,
        hash_suite: str = "xmd-sha256-sswu-v1",
    ):
        self.profile = profile
        self.p = p
        self.q = q
        self.pk1 = pk1
        self.pk2 = pk2
        self.pk_trac = pk_trac
        self.hash_suite = hash_suite
        self._pk2_prep = pk2.prepare()
        self._q_prep = q.prepare()

    def validate(self) -> None:
        """Check the defining identity e(PK1, Q) == e(P, PK2)."""
        if pair(self.pk1, self.q) != pair(self.p, self.pk2):
            raise ValueError("inconsistent public parameters")


class MasterSecret:
    """Key-issuing secret, held by the registration authority only."""

    __slots__ = ("__s",)

    def __init__(self, s: int):
        if not 0 < s < ORDER:
            raise ValueError("master secret out of range")
        self.__s = s

    @property
    def s(self) -> int:
        return self.__s

    def __repr__(self):
        return "MasterSecret(<sealed>)"


class TraceSecret:
    """Tag-opening secret, held by the law-enforcement authority only."""

    __slots__ = ("__s",)

    def __init__(self, s_trac: int):
        if not 0 < s_trac < ORDER:
            raise ValueError("trace secret out of range")
        self.__s = s_trac

    @property
    def s_trac(self) -> int:
        return self.__s

    def __repr__(self):
        return "TraceSecret(<sealed>)"


@dataclass(frozen=True)
class VehicleCredential:
    vid: str
    pid: G1Element
    psk: G1Element


@dataclass(frozen=True)
class RsuCredential:
    rsu_id: str
    rid: G2Element
    rsk: G2Element


class RingList:
    """Pseudonym list issued by an RSU; ordered, distinct members."""

    __slots__ = ("pids",)

    def __init__(self, pids: Sequence[G1Element]):
        pids = tuple(pids)
        if not pids:
            raise RingError("ring list must not be empty")
        seen = {p.to_bytes() for p in pids}
        if len(seen) != len(pids):
            raise RingError("duplicate pseudonym in ring list")
        self.pids = pids

    def __len__(self) -> int:
        return len(self.pids)

    def __iter__(self) -> Iterator[G1Element]:
        return iter(self.pids)

    def __contains__(self, pid: G1Element) -> bool:
        return any(pid == p for p in self.pids)


class SignerRing:
    """Ordered pseudonym subset bound into one signature. Size two or more,
    no duplicates; the order is fixed here and hashed by signer and verifier.
    """

    __slots__ = ("pids", "_encoded")

    def __init__(self, pids: Sequence[G1Element]):
        pids = tuple(pids)
        if len(pids) < 2:
            raise RingError("signer ring needs at least two members")
        if len({p.to_bytes() for p in pids}) != len(pids):
            raise RingError("duplicate pseudonym in signer ring")
        self.pids = pids
        self._encoded: bytes | None = None

    def __len__(self) -> int:
        return len(self.pids)

    def __iter__(self) -> Iterator[G1Element]:
        return iter(self.pids)

    def __getitem__(self, i: int) -> G1Element:
        return self.pids[i]

    def __eq__(self, other):
        if not isinstance(other, SignerRing):
            return NotImplemented
        return self.encode() == other.encode()

    def __hash__(self):
        return hash(self.encode())

    def encode(self) -> bytes:
        """Ordered concatenation of compressed pseudonyms."""
        if self._encoded is None:
            self._encoded = b"".join(p.to_bytes() for p in self.pids)
        return self._encoded

    def index_of(self, pid: G1Element) -> int:
        target = pid.to_bytes()
        for i, p in enumerate(self.pids):
            if p.to_bytes() == target:
                return i
        raise RingError("pseudonym not in ring")


@dataclass(frozen=True)
class RingSignature:
    u: tuple[G1Element, ...]
    v: G1Element


@dataclass(frozen=True)
class TraceTag:
    value: GtElement


@dataclass(frozen=True)
class IbeCiphertext:
    u: G1Element
    v: bytes


@dataclass(frozen=True)
class BroadcastEnvelope:
    """Everything a vehicle puts on the air for one message."""

    message: bytes
    signature: RingSignature
    ring: SignerRing
    timestamp: int
    tag: TraceTag


class RejectReason(Enum):
    STRUCTURAL = "structural"
    EQUATION = "equation"


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    reason: RejectReason | None = None
    detail: str = ""
    envelope_index: int | None = None

    def __bool__(self) -> bool:
        return self.ok


_ACCEPT = VerifyResult(True)


# -- setup and key generation -------------------------------------------------


def setup(rng: Rng, profile_name: str = pairing.DEFAULT_PROFILE):
    """Create public parameters plus the two authority secrets.

    Returns (PublicParams, MasterSecret, TraceSecret). The issuing secret s
    defines PK1 = s*P and PK2 = s*Q; the tracing secret defines its own
    public key s_trac * Q.
    """
    profile = get_profile(profile_name)
    if not profile.has_backend:
        raise ValueError(f"profile {profile.name!r} has no arithmetic backend")
    p = G1Element.generator()
    q = G2Element.generator()
    s = rand_scalar(rng)
    s_trac = rand_scalar(rng)
    pp = PublicParams(profile, p, q, s * p, s * q, s_trac * q)
    return pp, MasterSecret(s), TraceSecret(s_trac)


def keygen_vehicle(master: MasterSecret, vid: str) -> VehicleCredential:
    """Derive a vehicle credential: pseudonym H1(vid) and secret s*H1(vid)."""
    if not vid:
        raise ValueError("vehicle identity must be nonempty")
    pid = hash_to_g1(vid.encode())
    return VehicleCredential(vid, pid, master.s * pid)


def keygen_rsu(master: MasterSecret, rsu_id: str) -> RsuCredential:
    """Derive an RSU credential in G2: RID = H2(id), RSK = s*RID."""
    if not rsu_id:
        raise ValueError("rsu identity must be nonempty")
    rid = hash_to_g2(rsu_id.encode())
    return RsuCredential(rsu_id, rid, master.s * rid)


# -- identity-based encryption of pseudonyms ----------------------------------


def ibe_encrypt(pp: PublicParams, rid: G2Element, pid: G1Element, rng: Rng) -> IbeCiphertext:
    """Encrypt a compressed pseudonym to an RSU identity key.

    C = (r*P, pid_bytes XOR kdf(e(PK1, RID)^r)). Fresh r per call, so two
    encryptions of the same pseudonym differ.
    """
    r = rand_scalar(rng)
    g_r = pair(pp.pk1, rid) ** r
    mask = kdf(g_r, pairing.G1_LEN, _IBE_MASK_LABEL)
    pid_bytes = pid.to_bytes()
    return IbeCiphertext(r * pp.p, bytes(a ^ b for a, b in zip(pid_bytes, mask)))


def ibe_decrypt(pp: PublicParams, rsk: G2Element, ct: IbeCiphertext) -> G1Element:
    """Recover the pseudonym with the RSU secret key.

    Correct because e(r*P, s*RID) == e(PK1, RID)^r. Raises DecryptionError
    when the unmasked bytes are not a valid compressed G1 point.
    """
    if len(ct.v) != pairing.G1_LEN:
        raise DecryptionError("ciphertext mask part has wrong length")
    mask = kdf(pair(ct.u, rsk), pairing.G1_LEN, _IBE_MASK_LABEL)
    pid_bytes = bytes(a ^ b for a, b in zip(ct.v, mask))
    try:
        return G1Element.from_bytes(pid_bytes)
    except Exception as exc:
        raise DecryptionError("recovered bytes are not a valid pseudonym") from exc


# -- shared keys ---------------------------------------------------------------


def derive_shared_key_rsu(rsk: G2Element, pid: G1Element) -> SymmetricKey:
    """RSU side: K = kdf(e(PID, RSK))."""
    return SymmetricKey(kdf(pair(pid, rsk), KEY_LEN, _SHARED_KEY_LABEL))


def derive_shared_key_vehicle(psk: G1Element, rid: G2Element) -> SymmetricKey:
    """Vehicle side: K = kdf(e(PSK, RID)); equals the RSU-side key because
    e(s*PID, RID) == e(PID, s*RID)."""
    return SymmetricKey(kdf(pair(psk, rid), KEY_LEN, _SHARED_KEY_LABEL))


# -- signing -------------------------------------------------------------------


def _tag_point(vid: str, timestamp: int) -> G1Element:
    return hash_to_g1(vid.encode() + encoding.u64(timestamp))


def make_tag(pp: PublicParams, vid: str, timestamp: int) -> TraceTag:
    """Trace tag e(H1(vid || t), PK_trac); deterministic in (vid, t)."""
    return TraceTag(pair(_tag_point(vid, timestamp), pp.pk_trac))


def _challenge(
    message: bytes, tag: TraceTag, timestamp: int, ring: SignerRing, u_i: G1Element
) -> int:
    """Per-member challenge scalar. Every component is length-prefixed and the
    ring is bound in its transmitted order, so no two distinct inputs collide.
    """
    preimage = b"".join(
        (
            encoding.lv(message),
            encoding.lv(tag.value.to_bytes()),
            encoding.lv(encoding.u64(timestamp)),
            encoding.lv(ring.encode()),
            encoding.lv(u_i.to_bytes()),
        )
    )
    return hash_to_scalar(preimage, _CHALLENGE_DST)


def ring_sign(
    pp: PublicParams,
    credential: VehicleCredential,
    ring: SignerRing,
    signer_index: int,
    message: bytes,
    timestamp: int,
    tag: TraceTag,
    rng: Rng,
    _debug_sink: dict | None = None,
) -> RingSignature:
    """Sign on behalf of the ring, hiding the signer among its members.

    For every non-signer index a random U_i is drawn; the signer's U_k is
    computed so that sum(U_i + h_i*PID_i) collapses to (h_k + r')*PID_k,
    which V = (h_k + r')*PSK_k then matches under the pairing equation.
    """
    n = len(ring)
    if not 0 <= signer_index < n:
        raise RingError("signer index out of range")
    if ring[signer_index] != credential.pid:
        raise RingError("ring slot does not hold the signer's pseudonym")

    u: list[G1Element | None] = [None] * n
    h: list[int | None] = [None] * n
    for i in range(n):
        if i == signer_index:
            continue
        # the masking points are published verbatim, so the faster
        # variable-time multiplication leaks nothing useful
        u[i] = pp.p.mul_vartime(rand_scalar(rng))
        h[i] = _challenge(message, tag, timestamp, ring, u[i])

    r_prime = rand_scalar(rng)
    others = [u[i] for i in range(n) if i != signer_index]
    weighted = g1_msm(
        [ring[i] for i in range(n) if i != signer_index],
        [h[i] for i in range(n) if i != signer_index],
    )
    u_k = r_prime * ring[signer_index] - (g1_sum(others) + weighted)
    u[signer_index] = u_k
    h_k = _challenge(message, tag, timestamp, ring, u_k)
    v = ((h_k + r_prime) % ORDER) * credential.psk

    if _debug_sink is not None:
        _debug_sink["r_prime"] = r_prime
        _debug_sink["h"] = [h[i] if i != signer_index else h_k for i in range(n)]
    return RingSignature(tuple(u), v)


# -- verification --------------------------------------------------------------


def _structural_check(env: BroadcastEnvelope, index: int | None = None) -> VerifyResult | None:
    n = len(env.ring)
    if n < 2:
        return VerifyResult(False, RejectReason.STRUCTURAL, "ring too small", index)
    if len(env.signature.u) != n:
        return VerifyResult(
            False, RejectReason.STRUCTURAL, "signature element count does not match ring", index
        )
    if len({p.to_bytes() for p in env.ring}) != n:
        return VerifyResult(False, RejectReason.STRUCTURAL, "duplicate ring member", index)
    return None


def _aggregate(env: BroadcastEnvelope) -> G1Element:
    """sum(U_i + h_i * PID_i) with challenges recomputed exactly as signed."""
    hs = [
        _challenge(env.message, env.tag, env.timestamp, env.ring, u_i)
        for u_i in env.signature.u
    ]
    return g1_sum(list(env.signature.u)) + g1_msm(list(env.ring.pids), hs)


def verify_single(pp: PublicParams, env: BroadcastEnvelope) -> VerifyResult:
    """Check one envelope: e(sum(U_i + h_i*PID_i), PK2) == e(V, Q).

    Exactly two pairing evaluations regardless of ring size.
    """
    structural = _structural_check(env)
    if structural is not None:
        return structural
    combined = multi_pair(
        [(_aggregate(env), pp._pk2_prep), (-env.signature.v, pp._q_prep)]
    )
    if combined.is_identity():
        return _ACCEPT
    return VerifyResult(False, RejectReason.EQUATION, "pairing equation failed")


def verify_batch(
    pp: PublicParams,
    envs: Sequence[BroadcastEnvelope],
    rng: Rng,
    security_exponent_bits: int = 64,
    unit_weights: bool = False,
) -> VerifyResult:
    """Verify many envelopes with two pairings total.

    Each envelope's aggregate and V are weighted by a fresh random exponent
    delta_i in [1, 2^bits) before summation, so a batch with any invalid
    member passes with probability at most 2^-bits. ``unit_weights`` selects
    the unweighted sum (delta_i = 1) for benchmark comparison; it is not
    sound against cross-envelope cancellation and is off by default.
    """
    if not envs:
        return VerifyResult(False, RejectReason.STRUCTURAL, "empty batch")
    for idx, env in enumerate(envs):
        structural = _structural_check(env, idx)
        if structural is not None:
            return structural

    if unit_weights:
        deltas = [1] * len(envs)
    else:
        bound = 1 << security_exponent_bits
        deltas = [1 + (int.from_bytes(rng.randbytes(16), "big") % (bound - 1)) for _ in envs]

    aggregates = [_aggregate(env) for env in envs]
    lhs = g1_msm(aggregates, deltas)
    rhs = g1_msm([env.signature.v for env in envs], deltas)
    combined = multi_pair([(lhs, pp._pk2_prep), (-rhs, pp._q_prep)])
    if combined.is_identity():
        return _ACCEPT
    return VerifyResult(False, RejectReason.EQUATION, "batched pairing equation failed")


# -- tracing -------------------------------------------------------------------


def trace_open(trace: TraceSecret, tag: TraceTag) -> GtElement:
    """Strip the tracing key from a tag: tag^(1/s_trac) = e(H1(vid||t), Q)."""
    inv = pow(trace.s_trac, -1, ORDER)
    return tag.value**inv


def trace_candidates(
    registry: Mapping[bytes, str], ring: Sequence[G1Element], timestamp: int
) -> list[tuple[str, GtElement]]:
    """Reference values e(H1(vid||t), Q) for every ring member's identity.

    The registry maps compressed pseudonym bytes to registered identities;
    unknown pseudonyms are a registry error.
    """
    from .errors import UnknownIdentityError

    q = G2Element.generator()
    out = []
    for pid in ring:
        key = pid.to_bytes()
        if key not in registry:
            raise UnknownIdentityError("ring member not present in identity registry")
        vid = registry[key]
        out.append((vid, pair(_tag_point(vid, timestamp), q)))
    return out


def trace_match(
    registry: Mapping[bytes, str],
    ring: Sequence[G1Element],
    timestamp: int,
    tag_open: GtElement,
) -> str | None:
    """Identify the signer: the unique ring identity whose reference value
    equals the opened tag. None when no ring member matches."""
    matches = [vid for vid, h in trace_candidates(registry, ring, timestamp) if h == tag_open]
    if not matches:
        return None
    if len(matches) > 1:
        raise TraceIntegrityError("opened tag matched multiple identities")
    return matches[0]
