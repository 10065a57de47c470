import math

import numpy as np
import pytest

from latticepuf import lwe, zq
from latticepuf.lwe import Ciphertext, LweParams, SecretKey


def test_default_bit_lengths():
    p = LweParams()
    assert p.challenge_bits == 1288
    assert p.secret_bits == 1280
    assert p.log2q == 8


def test_params_validation():
    with pytest.raises(ValueError):
        LweParams(q=100)
    with pytest.raises(ValueError):
        LweParams(n=0)
    with pytest.raises(ValueError):
        LweParams(alpha=1.5)


def test_secret_packing_bijection():
    p = LweParams()
    rng = zq.make_rng(0)
    sk, _, _ = lwe.keygen(p, rng)
    assert sk.packed.size == 1280
    back = SecretKey.from_packed(sk.packed, p)
    assert np.array_equal(back.s, sk.s)


def test_keygen_zero_alpha_noiseless():
    p = LweParams(n=4, q=16, m=8, alpha=0.0)
    sk, pk, nv = lwe.keygen(p, zq.make_rng(1))
    assert not nv.e.any()
    assert np.array_equal(pk.b, (pk.A @ sk.s) % p.q)


def test_keygen_toy_b_recomputation():
    p = LweParams(n=2, q=4, m=3, alpha=0.3)
    sk, pk, nv = lwe.keygen(p, zq.make_rng(2))
    recomputed = [(int(pk.A[i] @ sk.s) + int(nv.e[i])) % p.q for i in range(p.m)]
    assert recomputed == list(pk.b)


def test_quantize_boundaries_q256():
    assert lwe.quantize(0, 256) == 0
    assert lwe.quantize(64, 256) == 0
    assert lwe.quantize(65, 256) == 1
    assert lwe.quantize(192, 256) == 1
    assert lwe.quantize(193, 256) == 0
    assert lwe.quantize(255, 256) == 0


def test_quantizer_partition_and_antipodal():
    q = 256
    for x in range(q):
        v = lwe.quantize(x, q)
        assert v in (0, 1)
        assert v != lwe.quantize((x + q // 2) % q, q)
    xs = np.arange(q)
    assert np.array_equal(lwe.quantize_vec(xs, q), [lwe.quantize(int(x), q) for x in xs])


def test_decrypt_examples():
    p = LweParams(n=2, q=256, m=4)
    sk = SecretKey(np.array([3, 5]), p)
    # hand computation: 200 - (10*3 + 20*5) = 200 - 130 = 70 -> (64, 192] -> 1
    assert lwe.decrypt_bit(sk, Ciphertext(np.array([10, 20]), 200)) == 1
    dot = int(np.array([10, 20]) @ sk.s) % 256
    assert lwe.decrypt_bit(sk, Ciphertext(np.array([10, 20]), dot)) == 0
    assert lwe.decrypt_bit(sk, Ciphertext(np.array([10, 20]), (dot + 128) % 256)) == 1


def test_decrypt_dimension_mismatch():
    p = LweParams(n=2, q=256, m=4)
    sk = SecretKey(np.array([3, 5]), p)
    with pytest.raises(ValueError):
        lwe.decrypt_bit(sk, Ciphertext(np.array([1, 2, 3]), 0))


def test_encrypt_forced_zero_x():
    p = LweParams()
    sk, pk, _ = lwe.keygen(p, zq.make_rng(3))
    c = lwe.encrypt_bit(pk, 1, zq.make_rng(4), x=np.zeros(p.m, dtype=np.int64))
    assert not c.a.any()
    assert c.b == 128
    c0 = lwe.encrypt_bit(pk, 0, zq.make_rng(4), x=np.zeros(p.m, dtype=np.int64))
    assert c0.b == 0


def test_encrypt_rejects_non_bit():
    p = LweParams(n=4, q=16, m=8)
    _, pk, _ = lwe.keygen(p, zq.make_rng(5))
    with pytest.raises(ValueError):
        lwe.encrypt_bit(pk, 2, zq.make_rng(6))


def test_noiseless_correctness_exhaustive_small():
    p = LweParams(n=2, q=4, m=3, alpha=0.0)
    rng = zq.make_rng(7)
    for _ in range(50):
        sk, pk, _ = lwe.keygen(p, rng)
        for r in (0, 1):
            for _ in range(20):
                c = lwe.encrypt_bit(pk, r, rng)
                assert lwe.decrypt_bit(sk, c) == r


def test_noiseless_correctness_defaults():
    p = LweParams(alpha=0.0)
    sk, pk, _ = lwe.keygen(p, zq.make_rng(8))
    rng = zq.make_rng(9)
    r = rng.integers(0, 2, size=10**4, dtype=np.int64)
    a, b = lwe.encrypt_bits_batch(pk, r, rng)
    assert np.array_equal(lwe.decrypt_bits_batch(sk, a, b), r)


def test_reference_error_rate_over_keys():
    """10^5 reference encryptions across fresh keys land in the documented band.

    The per-key error rate scatters widely (the accumulated-noise offset is
    key-specific), so the band is only meaningful across a population.
    """
    p = LweParams()
    rng = zq.make_rng(10)
    errors = 0
    n_keys, per_key = 100, 1000
    for _ in range(n_keys):
        sk, pk, _ = lwe.keygen(p, rng)
        r = rng.integers(0, 2, size=per_key, dtype=np.int64)
        a, b = lwe.encrypt_bits_batch(pk, r, rng)
        errors += int(np.count_nonzero(lwe.decrypt_bits_batch(sk, a, b) != r))
    rate = errors / (n_keys * per_key)
    assert 0.008 <= rate <= 0.018, rate


def test_mc_matches_analytic_within_3_sigma():
    p = LweParams()
    rng = zq.make_rng(11)
    errors = 0
    n_keys, per_key = 2000, 50
    for _ in range(n_keys):
        sk, pk, _ = lwe.keygen(p, rng)
        r = rng.integers(0, 2, size=per_key, dtype=np.int64)
        a, b = lwe.encrypt_bits_batch(pk, r, rng)
        errors += int(np.count_nonzero(lwe.decrypt_bits_batch(sk, a, b) != r))
    n = n_keys * per_key
    rate = errors / n
    analytic = lwe.decryption_error_rate(0.022, 256)
    sigma = math.sqrt(analytic * (1 - analytic) / n)
    assert abs(rate - analytic) <= 3 * sigma, (rate, analytic)


def test_pack_challenge_examples():
    p = LweParams()
    bits = np.zeros(1288, dtype=np.uint8)
    bits[0] = 1
    ct = lwe.pack_challenge(bits, p)
    assert ct.a[0] == 1
    bits = np.zeros(1288, dtype=np.uint8)
    bits[7] = 1
    assert lwe.pack_challenge(bits, p).a[0] == 128
    # final 8-bit group is b
    bits = np.zeros(1288, dtype=np.uint8)
    bits[1280] = 1
    assert lwe.pack_challenge(bits, p).b == 1


def test_pack_unpack_round_trip():
    p = LweParams()
    rng = zq.make_rng(12)
    for _ in range(100):
        bits = rng.integers(0, 2, 1288, dtype=np.uint8)
        assert np.array_equal(lwe.unpack_challenge(lwe.pack_challenge(bits, p), p), bits)
    for _ in range(100):
        a = rng.integers(0, 256, p.n, dtype=np.int64)
        b = int(rng.integers(0, 256))
        ct = Ciphertext(a, b)
        ct2 = lwe.pack_challenge(lwe.unpack_challenge(ct, p), p)
        assert np.array_equal(ct2.a, ct.a) and ct2.b == ct.b


def test_pack_challenge_length_check():
    with pytest.raises(ValueError):
        lwe.pack_challenge(np.zeros(100, dtype=np.uint8), LweParams())


def test_decryption_error_rate_values():
    assert lwe.decryption_error_rate(0.022, 256) == pytest.approx(0.0118, abs=2e-4)
    assert lwe.decryption_error_rate(0.011, 256) == pytest.approx(4.8e-7, rel=0.05)
    assert lwe.decryption_error_rate(0.0, 256) == 0.0
    assert lwe.decryption_error_rate(1e-9, 256) == 0.0  # Phi(huge) saturates
    with pytest.raises(ValueError):
        lwe.decryption_error_rate(0.022, 0)
