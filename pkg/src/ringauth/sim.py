"""Deterministic discrete-event protocol simulator.

A scenario fixes a seed, a topology (RSU regions, vehicles) and a schedule
of protocol and adversary events; running it yields an append-only event
log whose canonical serialization is bit-identical across runs of the same
scenario. The clock is integer milliseconds and advances only with the
schedule; entity-facing timestamps are the clock divided down to seconds.

Messages between entities travel as encoded frames, so every run also
exercises the wire formats end to end. An optional per-delivery drop
probability models a lossy broadcast medium (default lossless).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass
from typing import Any

from . import channel, entities, pairing, scheme, wire
from .entities import ProtocolConfig
from .errors import (
    ExpiredRingListError,
    RingError,
    ScenarioError,
    SerializationError,
    WireFormatError,
)
from .rng import DrbgRng, randbelow

EVENT_KINDS = {
    "acquire_ring",
    "broadcast",
    "move",
    "revoke",
    "replay",
    "forge",
    "invalid_pubkey",
    "revoked_request",
    "trace",
}


@dataclass(frozen=True)
class Scenario:
    seed: int
    rsus: int
    vehicles: int
    events: tuple[dict[str, Any], ...]
    config: ProtocolConfig = entities.DEFAULT_CONFIG
    drop_prob: float = 0.0

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Scenario":
        try:
            seed = int(raw["seed"])
            rsus = int(raw["rsus"])
            vehicles = int(raw["vehicles"])
            events = list(raw.get("events", []))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"bad scenario structure: {exc}") from exc
        config = ProtocolConfig(**raw.get("config", {}))
        scenario = cls(
            seed=seed,
            rsus=rsus,
            vehicles=vehicles,
            events=tuple(events),
            config=config,
            drop_prob=float(raw.get("drop_prob", 0.0)),
        )
        scenario.validate()
        return scenario

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"scenario is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def validate(self) -> None:
        if self.rsus < 1 or self.vehicles < 0:
            raise ScenarioError("topology needs at least one rsu")
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ScenarioError("drop_prob must be a probability")
        for i, ev in enumerate(self.events):
            kind = ev.get("kind")
            if kind not in EVENT_KINDS:
                raise ScenarioError(f"event {i}: unknown kind {kind!r}")
            if "at" not in ev or int(ev["at"]) < 0:
                raise ScenarioError(f"event {i}: missing or negative time")
            for key, bound in (("vehicle", self.vehicles), ("rsu", self.rsus), ("region", self.rsus)):
                if key in ev and not 0 <= int(ev[key]) < bound:
                    raise ScenarioError(f"event {i}: {key} index out of range")


class EventLog:
    """Append-only record list with canonical JSONL serialization."""

    FIELDS = ("t", "entity", "kind", "outcome", "size", "pairings", "detail")

    def __init__(self):
        self.records: list[dict[str, Any]] = []

    def append(
        self,
        t: int,
        entity: str,
        kind: str,
        outcome: str,
        size: int = 0,
        pairings: int = 0,
        detail: str = "",
    ) -> None:
        self.records.append(
            {
                "t": t,
                "entity": entity,
                "kind": kind,
                "outcome": outcome,
                "size": size,
                "pairings": pairings,
                "detail": detail,
            }
        )

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n"
            for rec in self.records
        )

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()

    def summary(self) -> list[tuple[str, str, int]]:
        counts: dict[tuple[str, str], int] = {}
        for rec in self.records:
            key = (rec["kind"], rec["outcome"])
            counts[key] = counts.get(key, 0) + 1
        return [(k, o, n) for (k, o), n in sorted(counts.items())]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(self.FIELDS)
        for rec in self.records:
            writer.writerow([rec[f] for f in self.FIELDS])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["kind", "outcome", "count"])
        for kind, outcome, count in self.summary():
            writer.writerow([kind, outcome, count])
        return buf.getvalue()


class _Sim:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.log = EventLog()
        master = DrbgRng(scenario.seed)
        self.rng = master.child("protocol")
        self.loss_rng = master.child("loss")
        self.trc, self.lea = entities.bootstrap(master.child("setup"), config=scenario.config)
        self.rsus = [
            entities.Rsu(
                self.trc.register_rsu(f"rsu/{i:02d}"),
                self.trc.pp,
                self.trc,
                scenario.config,
                master.child(f"rsu/{i}"),
            )
            for i in range(scenario.rsus)
        ]
        self.vehicles = [
            entities.Vehicle(
                self.trc.register_vehicle(f"veh/{i:03d}"), self.trc.pp, scenario.config
            )
            for i in range(scenario.vehicles)
        ]
        self.region = [0] * scenario.vehicles
        self.last_broadcast: tuple[int, bytes, str | None] | None = None
        self.last_accepted_env: tuple[scheme.BroadcastEnvelope, str | None] | None = None

    def vid(self, i: int) -> str:
        return f"veh/{i:03d}"

    def _dropped(self) -> bool:
        p = self.scenario.drop_prob
        if p <= 0.0:
            return False
        return randbelow(self.loss_rng, 10**9) < int(p * 10**9)

    def _deliver_envelope(
        self, t_ms: int, region: int, frame: bytes, exclude: int | None, signer: str | None
    ) -> None:
        now = t_ms // 1000
        for i, vehicle in enumerate(self.vehicles):
            if self.region[i] != region or i == exclude:
                continue
            if self._dropped():
                self.log.append(t_ms, self.vid(i), "receive", "dropped", len(frame))
                continue
            try:
                msg = wire.decode_frame(frame)
            except (WireFormatError, SerializationError):
                self.log.append(t_ms, self.vid(i), "receive", "malformed", len(frame))
                continue
            if not isinstance(msg, wire.EnvelopeMsg):
                self.log.append(t_ms, self.vid(i), "receive", "malformed", len(frame))
                continue
            with pairing.count_pairings() as window:
                result = vehicle.receive(msg.envelope, now)
            outcome = "accept" if result.accepted else result.reason
            self.log.append(t_ms, self.vid(i), "receive", outcome, len(frame), window.count)
            if result.accepted:
                self.last_accepted_env = (msg.envelope, signer)

    # -- event handlers ----------------------------------------------------

    def ev_acquire_ring(self, t_ms: int, ev: dict) -> None:
        i = int(ev["vehicle"])
        vehicle = self.vehicles[i]
        rsu = self.rsus[self.region[i]]
        now = t_ms // 1000
        with pairing.count_pairings() as window:
            request = vehicle.request_ring(
                wire.decode_frame(wire.encode_frame(rsu.rid_broadcast())), self.rng
            )
            request_frame = wire.encode_frame(request)
            outcome = rsu.handle_ring_request(wire.decode_frame(request_frame), now)
            if not outcome.granted:
                self.log.append(
                    t_ms, f"rsu/{self.region[i]:02d}", "ring_request", outcome.reason,
                    len(request_frame), window.count,
                )
                return
            response_frame = wire.encode_frame(outcome.response)
            result = vehicle.accept_sealed_list(wire.decode_frame(response_frame), now)
        self.log.append(
            t_ms,
            self.vid(i),
            "acquire_ring",
            "ok" if result.accepted else result.reason,
            len(response_frame),
            window.count,
        )

    def ev_broadcast(self, t_ms: int, ev: dict) -> None:
        i = int(ev["vehicle"])
        vehicle = self.vehicles[i]
        now = t_ms // 1000
        message = str(ev.get("message", "beacon")).encode()
        ring_size = int(ev["ring_size"]) if "ring_size" in ev else None
        try:
            with pairing.count_pairings() as window:
                env = vehicle.broadcast(message, now, self.rng, ring_size)
        except (ExpiredRingListError, RingError) as exc:
            self.log.append(t_ms, self.vid(i), "broadcast", type(exc).__name__)
            return
        frame = wire.encode_frame(wire.EnvelopeMsg(env))
        self.log.append(t_ms, self.vid(i), "broadcast", "sent", len(frame), window.count)
        self.last_broadcast = (self.region[i], frame, self.vid(i))
        self._deliver_envelope(t_ms, self.region[i], frame, exclude=i, signer=self.vid(i))

    def ev_move(self, t_ms: int, ev: dict) -> None:
        i = int(ev["vehicle"])
        self.region[i] = int(ev["rsu"])
        self.log.append(t_ms, self.vid(i), "move", f"region-{self.region[i]}")

    def ev_revoke(self, t_ms: int, ev: dict) -> None:
        i = int(ev["vehicle"])
        self.trc.revoke(self.vid(i))
        self.log.append(t_ms, "trc", "revoke", "ok", detail=self.vid(i))

    def ev_replay(self, t_ms: int, ev: dict) -> None:
        if self.last_broadcast is None:
            self.log.append(t_ms, "adversary", "replay", "nothing-to-replay")
            return
        region, frame, signer = self.last_broadcast
        self.log.append(t_ms, "adversary", "replay", "sent", len(frame))
        self._deliver_envelope(t_ms, region, frame, exclude=None, signer=signer)

    def ev_forge(self, t_ms: int, ev: dict) -> None:
        """Envelope with random group elements over registered pseudonyms."""
        region = int(ev.get("region", 0))
        now = t_ms // 1000
        pp = self.trc.pp
        ring = scheme.SignerRing(list(self.trc.decoy_pids()[: self.scenario.config.default_ring_size]))
        us = tuple(
            pairing.rand_scalar(self.rng) * pp.p for _ in range(len(ring))
        )
        v = pairing.rand_scalar(self.rng) * pp.p
        tag = scheme.TraceTag(pairing.pair(pp.p, pp.pk_trac) ** pairing.rand_scalar(self.rng))
        env = scheme.BroadcastEnvelope(b"forged", scheme.RingSignature(us, v), ring, now, tag)
        frame = wire.encode_frame(wire.EnvelopeMsg(env))
        self.log.append(t_ms, "adversary", "forge", "sent", len(frame))
        self._deliver_envelope(t_ms, region, frame, exclude=None, signer=None)

    def ev_invalid_pubkey(self, t_ms: int, ev: dict) -> None:
        """A rogue node advertises a made-up RSU key and answers with garbage.

        Ring lists come only from authenticated RSU channels, so the fake
        advertisement cannot poison anyone's ring: the sealed response fails
        authentication and every vehicle keeps its previous list.
        """
        region = int(ev.get("region", 0))
        now = t_ms // 1000
        fake_rid = pairing.rand_scalar(self.rng) * pairing.G2Element.generator()
        fake_broadcast = wire.RidBroadcast("rogue", fake_rid)
        for i, vehicle in enumerate(self.vehicles):
            if self.region[i] != region:
                continue
            vehicle.request_ring(fake_broadcast, self.rng)
            garbage = channel.SealedRingList(
                bytes([channel.VERSION, channel.ALG_AES256CTR_HMACSHA256])
                + self.rng.randbytes(channel.NONCE_LEN),
                self.rng.randbytes(64),
                self.rng.randbytes(channel.MAC_LEN),
                now + 3600,
            )
            result = vehicle.accept_sealed_list(wire.SealedListMsg(garbage), now)
            self.log.append(
                t_ms, self.vid(i), "invalid_pubkey", "rejected" if not result.accepted else "ACCEPTED",
                detail=result.reason,
            )

    def ev_revoked_request(self, t_ms: int, ev: dict) -> None:
        i = int(ev["vehicle"])
        vehicle = self.vehicles[i]
        rsu = self.rsus[self.region[i]]
        now = t_ms // 1000
        request = vehicle.request_ring(rsu.rid_broadcast(), self.rng)
        outcome = rsu.handle_ring_request(request, now)
        self.log.append(
            t_ms,
            f"rsu/{self.region[i]:02d}",
            "revoked_request",
            "granted" if outcome.granted else outcome.reason,
            detail=self.vid(i),
        )

    def ev_trace(self, t_ms: int, ev: dict) -> None:
        if self.last_accepted_env is None:
            self.log.append(t_ms, "lea", "trace", "nothing-to-trace")
            return
        env, true_vid = self.last_accepted_env
        with pairing.count_pairings() as window:
            traced = entities.lea_trace(self.lea, self.trc, env)
        outcome = "match" if traced == true_vid else f"mismatch:{traced}"
        self.log.append(t_ms, "lea", "trace", outcome, 0, window.count, detail=str(traced))

    def run(self) -> EventLog:
        ordered = sorted(enumerate(self.scenario.events), key=lambda p: (int(p[1]["at"]), p[0]))
        for _, ev in ordered:
            handler = getattr(self, f"ev_{ev['kind']}")
            handler(int(ev["at"]), ev)
        return self.log


def run_scenario(scenario: Scenario) -> EventLog:
    """Execute a scenario; same scenario, same log, bit for bit."""
    scenario.validate()
    return _Sim(scenario).run()
