import pytest

from ringauth import scheme
from ringauth.rng import DrbgRng


@pytest.fixture()
def rng():
    return DrbgRng(0xC0FFEE)


@pytest.fixture(scope="session")
def system():
    """One deterministic system setup shared across the test session."""
    pp, master, trace = scheme.setup(DrbgRng(42))
    return pp, master, trace


@pytest.fixture(scope="session")
def pp(system):
    return system[0]


@pytest.fixture(scope="session")
def master(system):
    return system[1]


@pytest.fixture(scope="session")
def trace(system):
    return system[2]


@pytest.fixture(scope="session")
def vehicle_creds(master):
    return [scheme.keygen_vehicle(master, f"test/veh/{i:02d}") for i in range(20)]


@pytest.fixture(scope="session")
def rsu_cred(master):
    return scheme.keygen_rsu(master, "test/rsu/00")


def make_envelope(pp, creds, rng, ring_size=4, signer=0, message=b"road works ahead", t=10_000):
    ring = scheme.SignerRing([c.pid for c in creds[:ring_size]])
    tag = scheme.make_tag(pp, creds[signer].vid, t)
    sig = scheme.ring_sign(pp, creds[signer], ring, signer, message, t, tag, rng)
    return scheme.BroadcastEnvelope(message, sig, ring, t, tag)
