"""Benchmark measurements: per-operation timings, verification scaling and
serialized sizes.

Timing uses the monotonic clock, discards warm-up iterations and reports
mean and standard deviation; pairing-operation counts come from the
instrumented counter and are hardware independent.
"""

from __future__ import annotations

import platform
import statistics
import sys
import time
from dataclasses import dataclass, field

from . import pairing, scheme, wire
from .pairing import CurveProfile, get_profile
from .rng import DrbgRng, Rng

WARMUP = 3


@dataclass
class BenchReport:
    profile: str
    machine: str
    trials: int
    sections: dict[str, list[dict]] = field(default_factory=dict)


def machine_descriptor() -> str:
    return (
        f"{platform.machine()} {platform.system()} "
        f"python-{sys.version_info.major}.{sys.version_info.minor}"
    )


def _time_op(fn, trials: int) -> tuple[float, float]:
    """Mean and stddev in milliseconds over `trials` timed runs."""
    for _ in range(WARMUP):
        fn()
    samples = []
    for _ in range(trials):
        t0 = time.perf_counter_ns()
        fn()
        samples.append((time.perf_counter_ns() - t0) / 1e6)
    mean = statistics.fmean(samples)
    std = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return mean, std


class _Fixture:
    """Shared keys, credentials and a signed envelope factory."""

    def __init__(self, profile_name: str, rng: Rng):
        self.rng = rng
        self.pp, self.master, self.trace = scheme.setup(rng, profile_name)
        self.creds = [scheme.keygen_vehicle(self.master, f"bench/veh/{i}") for i in range(16)]
        self.rsu = scheme.keygen_rsu(self.master, "bench/rsu")

    def envelope(self, ring_size: int, message: bytes = b"bench", t: int = 1 << 30):
        ring = scheme.SignerRing([c.pid for c in self.creds[:ring_size]])
        k = 0
        tag = scheme.make_tag(self.pp, self.creds[k].vid, t)
        sig = scheme.ring_sign(self.pp, self.creds[k], ring, k, message, t, tag, self.rng)
        return scheme.BroadcastEnvelope(message, sig, ring, t, tag)


def bench_ops(profile_name: str, trials: int, seed: int) -> list[dict]:
    """Timings for the primitive and scheme-level operations."""
    rng = DrbgRng(seed)
    fx = _Fixture(profile_name, rng)
    pp = fx.pp
    a = pairing.rand_scalar(rng)
    g1 = a * pp.p
    g2 = a * pp.q
    gt = pairing.pair(g1, g2)
    blob = rng.randbytes(64)
    env2 = fx.envelope(2)
    ct = scheme.ibe_encrypt(pp, fx.rsu.rid, fx.creds[0].pid, rng)

    ops = [
        ("pairing", lambda: pairing.pair(g1, g2)),
        ("gt_exp", lambda: gt**a),
        ("g1_mul", lambda: a * g1),
        ("g2_mul", lambda: a * g2),
        ("hash_to_g1", lambda: pairing.hash_to_g1(blob)),
        ("hash_to_g2", lambda: pairing.hash_to_g2(blob)),
        ("hash_to_scalar", lambda: pairing.hash_to_scalar(blob)),
        ("make_tag", lambda: scheme.make_tag(pp, "bench/veh/0", 12345)),
        ("ring_sign_n2", lambda: fx.envelope(2)),
        ("verify_single_n2", lambda: scheme.verify_single(pp, env2)),
        ("ibe_encrypt", lambda: scheme.ibe_encrypt(pp, fx.rsu.rid, fx.creds[0].pid, rng)),
        ("ibe_decrypt", lambda: scheme.ibe_decrypt(pp, fx.rsu.rsk, ct)),
        ("shared_key_rsu", lambda: scheme.derive_shared_key_rsu(fx.rsu.rsk, fx.creds[0].pid)),
        ("shared_key_vehicle", lambda: scheme.derive_shared_key_vehicle(fx.creds[0].psk, fx.rsu.rid)),
    ]
    rows = []
    for name, fn in ops:
        mean, std = _time_op(fn, trials)
        rows.append({"op": name, "mean_ms": round(mean, 4), "std_ms": round(std, 4), "trials": trials})
    return rows


def bench_verify_vs_ringsize(
    profile_name: str, ring_sizes: list[int], trials: int, seed: int
) -> list[dict]:
    """Single-verification latency as the ring grows."""
    rng = DrbgRng(seed)
    fx = _Fixture(profile_name, rng)
    rows = []
    for n in ring_sizes:
        env = fx.envelope(n)
        mean, std = _time_op(lambda: scheme.verify_single(fx.pp, env), trials)
        with pairing.count_pairings() as window:
            scheme.verify_single(fx.pp, env)
        rows.append(
            {
                "ring_size": n,
                "mean_ms": round(mean, 4),
                "std_ms": round(std, 4),
                "pairings": window.count,
                "trials": trials,
            }
        )
    return rows


def bench_batch(
    profile_name: str, etas: list[int], ring_size: int, trials: int, seed: int
) -> list[dict]:
    """Single-loop versus batched verification for growing batch sizes.

    Batch mode uses the small-exponent test; a unit-weight row mirrors the
    plain summed check for comparison.
    """
    rng = DrbgRng(seed)
    fx = _Fixture(profile_name, rng)
    rows = []
    for eta in etas:
        envs = [fx.envelope(ring_size, b"bench-%d" % i, (1 << 30) + i) for i in range(eta)]

        def run_single():
            for env in envs:
                scheme.verify_single(fx.pp, env)

        def run_batch():
            scheme.verify_batch(fx.pp, envs, rng)

        def run_batch_unit():
            scheme.verify_batch(fx.pp, envs, rng, unit_weights=True)

        reps = max(1, trials // 10)
        single_mean, single_std = _time_op(run_single, reps)
        batch_mean, batch_std = _time_op(run_batch, reps)
        unit_mean, _ = _time_op(run_batch_unit, reps)
        with pairing.count_pairings() as single_window:
            run_single()
        with pairing.count_pairings() as batch_window:
            run_batch()
        rows.append(
            {
                "eta": eta,
                "single_total_ms": round(single_mean, 4),
                "single_std_ms": round(single_std, 4),
                "batch_ms": round(batch_mean, 4),
                "batch_std_ms": round(batch_std, 4),
                "batch_unit_weight_ms": round(unit_mean, 4),
                "single_pairings": single_window.count,
                "batch_pairings": batch_window.count,
                "speedup": round(single_mean / batch_mean, 2) if batch_mean else 0.0,
                "trials": reps,
            }
        )
    return rows


def bench_sizes(profile_names: list[str], ring_size: int = 2, message_len: int = 0) -> list[dict]:
    """Serialized sizes per profile, from the wire-format size model.

    For the backend profile the model is cross-checked against an actually
    encoded envelope elsewhere in the test suite; reference profiles use the
    model only.
    """
    rows = []
    for name in profile_names:
        profile = get_profile(name)
        sig = wire.signature_size(profile, ring_size)
        rows.append(
            {
                "profile": name,
                "g1_len": profile.g1_len,
                "pseudonym_bytes": profile.g1_len,
                "signature_elements": ring_size + 1,
                "signature_bytes_raw": (ring_size + 1) * profile.g1_len,
                "signature_bytes_framed": sig,
                "ring_bytes": ring_size * profile.g1_len,
                "tag_bytes": profile.gt_len,
                "envelope_bytes": wire.envelope_size(profile, ring_size, message_len),
                "security_bits": profile.security_bits,
            }
        )
    return rows


def rows_to_csv(rows: list[dict], gnuplot: bool = False) -> str:
    """Fixed-header CSV, or a gnuplot-ready whitespace table."""
    if not rows:
        return ""
    header = list(rows[0].keys())
    if gnuplot:
        lines = ["# " + " ".join(header)]
        lines.extend(" ".join(str(r[h]) for h in header) for r in rows)
        return "\n".join(lines) + "\n"
    lines = [",".join(header)]
    lines.extend(",".join(str(r[h]) for h in header) for r in rows)
    return "\n".join(lines) + "\n"
