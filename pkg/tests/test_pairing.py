import pytest

from ringauth import pairing
from ringauth.errors import (
    InvalidEncodingError,
    OffSubgroupError,
    UnknownProfileError,
    WrongLengthError,
)
from ringauth.pairing import (
    ORDER,
    G1Element,
    G2Element,
    GtElement,
    count_pairings,
    expand_message_xmd,
    g1_msm,
    g1_sum,
    hash_to_g1,
    hash_to_g2,
    hash_to_scalar,
    kdf,
    multi_pair,
    pair,
    rand_scalar,
)
from ringauth.rng import DrbgRng

P = G1Element.generator()
Q = G2Element.generator()


class TestPairing:
    def test_small_scalar_bilinearity(self):
        g = pair(P, Q)
        assert pair(1 * P, 1 * Q) == g
        assert pair(2 * P, 3 * Q) == g**6

    def test_degenerate_scalar(self):
        assert pair(0 * P, Q) == GtElement.identity()

    def test_non_degeneracy(self):
        assert pair(P, Q) != GtElement.identity()

    def test_bilinearity_random_cases(self):
        # independent oracle: exponentiation of the fixed base pairing in Gt
        rng = DrbgRng(101)
        g = pair(P, Q)
        for _ in range(100):
            a, b = rand_scalar(rng), rand_scalar(rng)
            assert pair(a * P, b * Q) == g ** (a * b % ORDER)

    def test_multi_pair_matches_product_of_pairs(self):
        rng = DrbgRng(7)
        a, b = rand_scalar(rng), rand_scalar(rng)
        lhs = multi_pair([(a * P, Q.prepare()), (b * P, Q.prepare())])
        assert lhs == pair(a * P, Q) * pair(b * P, Q)

    def test_pairing_counter(self):
        with count_pairings() as w:
            pair(P, Q)
            multi_pair([(P, Q.prepare()), (P, Q.prepare()), (P, Q.prepare())])
        assert w.count == 4


class TestHashToGroup:
    def test_deterministic(self):
        assert hash_to_g1(b"x") == hash_to_g1(b"x")
        assert hash_to_g2(b"x") == hash_to_g2(b"x")

    def test_distinct_on_corpus(self):
        seen = {hash_to_g1(b"input-%d" % i).to_bytes() for i in range(64)}
        assert len(seen) == 64
        assert hash_to_g1(b"a") != hash_to_g1(b"b")
        assert hash_to_g2(b"a") != hash_to_g2(b"b")

    def test_output_has_subgroup_order(self):
        for i in range(8):
            assert (hash_to_g1(b"ord-%d" % i) * ORDER).is_identity()
            assert (hash_to_g2(b"ord-%d" % i) * ORDER).is_identity()

    def test_domain_separation(self):
        assert hash_to_g1(b"x", b"DST-ONE") != hash_to_g1(b"x", b"DST-TWO")

    def test_matches_standard_suite(self):
        # RFC 9380 J.9.1, BLS12381G1_XMD:SHA-256_SSWU_RO_, empty message
        p_mod = 0x1A0111EA397FE69A4B1BA7B6434BACD764774B84F38512BF6730D2A0F6B0F6241EABFFFEB153FFFFB9FEFFFFFFFFAAAB
        x = 0x052926ADD2207B76CA4FA57A8734416C8DC95E24501772C814278700EED6D1E4E8CF62D9C09DB0FAC349612B759E79A1
        y = 0x08BA738453BFED09CB546DBB0783DBB3A5F1F566ED67BB6BE0E8C67E2E81A4CC68EE29813BB7994998F3EAE0C9C6A265
        compressed = bytearray(x.to_bytes(48, "big"))
        compressed[0] |= 0x80
        if y > (p_mod - 1) // 2:
            compressed[0] |= 0x20
        dst = b"QUUX-V01-CS02-with-BLS12381G1_XMD:SHA-256_SSWU_RO_"
        assert hash_to_g1(b"", dst).to_bytes() == bytes(compressed)


class TestHashToScalar:
    def test_deterministic(self):
        assert hash_to_scalar(b"same") == hash_to_scalar(b"same")

    def test_range_bulk(self):
        rng = DrbgRng(11)
        for _ in range(10_000):
            v = hash_to_scalar(rng.randbytes(24))
            assert 0 < v < ORDER

    def test_bucket_distribution(self):
        # chi-square over 16 equal buckets of the scalar range, 4096 samples;
        # threshold is the 99.9% quantile for 15 degrees of freedom
        buckets = [0] * 16
        n = 4096
        for i in range(n):
            buckets[hash_to_scalar(b"chi-%d" % i) * 16 // ORDER] += 1
        expected = n / 16
        chi2 = sum((b - expected) ** 2 / expected for b in buckets)
        assert chi2 < 37.7, f"chi-square {chi2:.1f} implausibly high: {buckets}"


class TestExpandMessageXmd:
    # RFC 9380 K.1 vectors, SHA-256, DST "QUUX-V01-CS02-with-expander-SHA256-128"
    DST = b"QUUX-V01-CS02-with-expander-SHA256-128"

    @pytest.mark.parametrize(
        "msg,out_len,expected_hex",
        [
            (b"", 0x20, "68a985b87eb6b46952128911f2a4412bbc302a9d759667f87f7a21d803f07235"),
            (b"abc", 0x20, "d8ccab23b5985ccea865c6c97b6e5b8350e794e603b4b97902f53a8a0d605615"),
            (
                b"abcdef0123456789",
                0x20,
                "eff31487c770a893cfb36f912fbfcbff40d5661771ca4b2cb4eafe524333f5c1",
            ),
        ],
    )
    def test_rfc_vectors(self, msg, out_len, expected_hex):
        assert expand_message_xmd(msg, self.DST, out_len).hex() == expected_hex


class TestSerialization:
    def test_roundtrip_g1_g2_gt(self):
        rng = DrbgRng(3)
        for _ in range(20):
            s = rand_scalar(rng)
            for el in (s * P, s * Q, pair(P, Q) ** s):
                assert type(el).from_bytes(el.to_bytes()) == el

    def test_lengths_match_profile(self):
        profile = pairing.get_profile("bls12-381")
        assert len(P.to_bytes()) == profile.g1_len == 48
        assert len(Q.to_bytes()) == profile.g2_len == 96
        assert len(pair(P, Q).to_bytes()) == profile.gt_len == 576

    def test_canonical_reencoding(self):
        rng = DrbgRng(4)
        for _ in range(10):
            raw = (rand_scalar(rng) * P).to_bytes()
            assert G1Element.from_bytes(raw).to_bytes() == raw

    def test_all_zero_rejected(self):
        with pytest.raises(InvalidEncodingError):
            G1Element.from_bytes(b"\x00" * 48)
        with pytest.raises(InvalidEncodingError):
            G2Element.from_bytes(b"\x00" * 96)

    def test_wrong_length_rejected(self):
        with pytest.raises(WrongLengthError):
            G1Element.from_bytes(b"\x01" * 47)
        with pytest.raises(WrongLengthError):
            GtElement.from_bytes(b"\x01" * 100)

    def test_off_subgroup_g1_rejected(self):
        # random on-curve points are off-subgroup with overwhelming
        # probability (the G1 cofactor is ~2^125)
        rng = DrbgRng(5)
        outcomes = set()
        for _ in range(400):
            cand = bytearray(rng.randbytes(48))
            cand[0] = (cand[0] & 0x1F) | 0x80
            try:
                G1Element.from_bytes(bytes(cand))
                outcomes.add("accepted")
            except OffSubgroupError:
                outcomes.add("off-subgroup")
            except InvalidEncodingError:
                outcomes.add("invalid")
        assert "off-subgroup" in outcomes
        assert "accepted" not in outcomes

    def test_off_subgroup_gt_rejected(self):
        raw = bytearray(pair(P, Q).to_bytes())
        raw[-1] ^= 1
        with pytest.raises((OffSubgroupError, InvalidEncodingError)):
            GtElement.from_bytes(bytes(raw))

    def test_identity_roundtrip(self):
        assert G1Element.from_bytes(G1Element.identity().to_bytes()).is_identity()


class TestScalarsAndAggregation:
    def test_rand_scalar_range_and_nonzero(self):
        rng = DrbgRng(6)
        for _ in range(200):
            v = rand_scalar(rng)
            assert 0 < v < ORDER

    def test_msm_matches_naive(self):
        rng = DrbgRng(8)
        points = [rand_scalar(rng) * P for _ in range(9)]
        scalars = [rand_scalar(rng) for _ in range(9)]
        naive = G1Element.identity()
        for pt, s in zip(points, scalars):
            naive = naive + s * pt
        assert g1_msm(points, scalars) == naive
        assert g1_sum(points) == g1_msm(points, [1] * 9)

    def test_msm_empty(self):
        assert g1_msm([], []).is_identity()
        assert g1_sum([]).is_identity()

    def test_mul_vartime_matches_ct(self):
        rng = DrbgRng(9)
        for _ in range(20):
            s = rand_scalar(rng)
            assert P.mul_vartime(s) == s * P


class TestKdf:
    def test_lengths_and_determinism(self):
        g = pair(P, Q)
        assert kdf(g, 48) == kdf(g, 48)
        assert len(kdf(g, 48)) == 48
        assert len(kdf(g, 32)) == 32
        assert kdf(g, 32, b"label-a") != kdf(g, 32, b"label-b")

    def test_distinct_elements_distinct_keys(self):
        assert kdf(pair(P, Q), 32) != kdf(pair(2 * P, Q), 32)


def test_unknown_profile():
    with pytest.raises(UnknownProfileError):
        pairing.get_profile("secp256k1")


def test_reference_profile_is_backendless():
    ref = pairing.get_profile("mnt159-ref")
    assert not ref.has_backend
    assert ref.g1_len == 30
