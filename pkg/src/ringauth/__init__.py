"""Identity-based ring-signature authentication for vehicular networks.

Library layout:

- ``pairing``: type-3 pairing engine, hashing, serialization, profiles
- ``scheme``: setup, key generation, identity-based encryption, ring
  signing, single and batch verification, trace opening and matching
- ``channel``: encrypt-then-MAC delivery of ring lists
- ``entities``: authority, roadside-unit and vehicle state machines
- ``wire``: canonical envelope and frame formats
- ``sim``: deterministic discrete-event protocol simulator
- ``bench`` / ``cli``: measurement tooling
"""

from . import bench, channel, entities, errors, pairing, rng, scheme, sim, wire
from .entities import Lea, ProtocolConfig, Rsu, Trc, Vehicle, bootstrap, lea_trace
from .pairing import (
    DEFAULT_PROFILE,
    ORDER,
    PROFILES,
    CurveProfile,
    G1Element,
    G2Element,
    GtElement,
    count_pairings,
    hash_to_g1,
    hash_to_g2,
    hash_to_scalar,
    kdf,
    pair,
    pairing_count,
)
from .rng import DrbgRng, SystemRng
from .scheme import (
    BroadcastEnvelope,
    IbeCiphertext,
    MasterSecret,
    PublicParams,
    RingList,
    RingSignature,
    RsuCredential,
    SignerRing,
    TraceSecret,
    TraceTag,
    VehicleCredential,
    ibe_decrypt,
    ibe_encrypt,
    keygen_rsu,
    keygen_vehicle,
    make_tag,
    ring_sign,
    setup,
    trace_match,
    trace_open,
    verify_batch,
    verify_single,
)

__version__ = "0.1.0"
