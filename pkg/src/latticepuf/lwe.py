"""LWE cryptosystem core: keygen, reference encrypt/decrypt, quantizer, challenge packing.

The reference encryption path (full public key, b^T x accumulation) exists as
an oracle for property tests; production challenge generation uses the
server's seed-expanded path instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import zq


@dataclass(frozen=True)
class LweParams:
    n: int = 160
    q: int = 256
    m: int = 256
    alpha: float = 0.022

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        zq.check_modulus(self.q)
        if not 0 <= self.alpha < 1:
            raise ValueError("alpha must be in [0, 1)")

    @property
    def log2q(self) -> int:
        return self.q.bit_length() - 1

    @property
    def challenge_bits(self) -> int:
        """(n+1)*log2(q): 1288 at the default parameter set."""
        return (self.n + 1) * self.log2q

    @property
    def secret_bits(self) -> int:
        """n*log2(q): 1280 at the default parameter set."""
        return self.n * self.log2q


@dataclass(frozen=True)
class SecretKey:
    s: np.ndarray  # n values in Z_q
    params: LweParams

    def __post_init__(self):
        s = np.ascontiguousarray(self.s, dtype=np.int64)
        if s.shape != (self.params.n,):
            raise ValueError("secret length does not match n")
        if np.any((s < 0) | (s >= self.params.q)):
            raise ValueError("secret entries out of Z_q")
        object.__setattr__(self, "s", s)

    @property
    def packed(self) -> np.ndarray:
        """The n*log2(q)-bit form; bit j of each group weighs 2^j."""
        return zq.zq_to_bits(self.s, self.params.q)

    @classmethod
    def from_packed(cls, bits: np.ndarray, params: LweParams) -> "SecretKey":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (params.secret_bits,):
            raise ValueError(f"packed secret must be {params.secret_bits} bits")
        return cls(zq.bits_to_zq(bits, params.q), params)


@dataclass(frozen=True)
class PublicKey:
    A: np.ndarray  # (m, n)
    b: np.ndarray  # (m,)
    params: LweParams


@dataclass(frozen=True)
class NoiseVector:
    e: np.ndarray  # (m,)

    def __post_init__(self):
        object.__setattr__(self, "e", np.ascontiguousarray(self.e, dtype=np.int64))


@dataclass(frozen=True)
class Ciphertext:
    a: np.ndarray  # (n,)
    b: int

    def __post_init__(self):
        object.__setattr__(self, "a", np.ascontiguousarray(self.a, dtype=np.int64))
        object.__setattr__(self, "b", int(self.b))


def keygen(params: LweParams, rng: np.random.Generator) -> tuple[SecretKey, PublicKey, NoiseVector]:
    """Uniform s and A, Gaussian e, b = A s + e mod q.

    The noise vector is returned on its own because the verifier reuses it
    for seed-expanded challenge generation.
    """
    q = params.q
    s = zq.sample_uniform_zq(q, rng, size=params.n)
    A = zq.sample_uniform_zq(q, rng, size=(params.m, params.n))
    e = zq.sample_discrete_gaussian(params.alpha, q, rng, size=params.m)
    b = (A @ s + e) % q
    return SecretKey(s, params), PublicKey(A, b, params), NoiseVector(e)


def encrypt_bit(pk: PublicKey, r: int, rng: np.random.Generator, x: np.ndarray | None = None) -> Ciphertext:
    """Reference encryption: c = (A^T x, b^T x + r*floor(q/2)) with x uniform in {0,1}^m.

    x can be forced for tests.
    """
    if r not in (0, 1):
        raise ValueError("plaintext must be a single bit")
    params = pk.params
    if x is None:
        x = zq.sample_uniform_bits(params.m, rng)
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (params.m,):
        raise ValueError("x must have m entries")
    a = (pk.A.T @ x) % params.q
    b = (int(pk.b @ x) + r * (params.q // 2)) % params.q
    return Ciphertext(a, b)


def encrypt_bits_batch(
    pk: PublicKey, r: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized reference encryption of many bits: returns (a (B, n), b (B,))."""
    params = pk.params
    r = np.asarray(r, dtype=np.int64)
    x = rng.integers(0, 2, size=(r.size, params.m), dtype=np.int64)
    xf = x.astype(np.float64)
    a = (xf @ pk.A.astype(np.float64)).astype(np.int64) % params.q
    b = ((xf @ pk.b.astype(np.float64)).astype(np.int64) + r * (params.q // 2)) % params.q
    return a, b


def decrypt_bits_batch(sk: SecretKey, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized decryption of many ciphertexts."""
    q = sk.params.q
    dots = (a.astype(np.float64) @ sk.s.astype(np.float64)).astype(np.int64) % q
    return quantize_vec((np.asarray(b, dtype=np.int64) - dots) % q, q)


def decrypt_bit(sk: SecretKey, c: Ciphertext) -> int:
    """Quantize b - <a, s> mod q."""
    if c.a.shape != (sk.params.n,):
        raise ValueError("ciphertext dimension does not match the key")
    q = sk.params.q
    return quantize((c.b - int(c.a @ sk.s)) % q, q)


def quantize(x: int, q: int) -> int:
    """0 on [0, q/4] and (3q/4, q-1]; 1 on (q/4, 3q/4]."""
    if not 0 <= x < q:
        raise ValueError("value out of Z_q")
    return int(q // 4 < x <= 3 * q // 4)


def quantize_vec(x: np.ndarray, q: int) -> np.ndarray:
    x = np.asarray(x)
    return ((x > q // 4) & (x <= 3 * q // 4)).astype(np.uint8)


def pack_challenge(c_bits: np.ndarray, params: LweParams) -> Ciphertext:
    """(n+1)*log2(q) challenge bits -> (a, b), LSB first within each group."""
    c_bits = np.asarray(c_bits, dtype=np.uint8)
    if c_bits.shape != (params.challenge_bits,):
        raise ValueError(f"challenge must be {params.challenge_bits} bits")
    vals = zq.bits_to_zq(c_bits, params.q)
    return Ciphertext(vals[: params.n], int(vals[params.n]))


def unpack_challenge(c: Ciphertext, params: LweParams) -> np.ndarray:
    """Exact inverse of pack_challenge."""
    if c.a.shape != (params.n,):
        raise ValueError("ciphertext dimension does not match params")
    vals = np.concatenate([c.a, [c.b]])
    return zq.zq_to_bits(vals, params.q)


def decryption_error_rate(alpha: float, m: int) -> float:
    """Analytic per-bit decryption error 2*(1 - Phi(sqrt(pi)/(2*alpha*sqrt(m))))."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if alpha == 0:
        return 0.0
    z = math.sqrt(math.pi) / (2.0 * alpha * math.sqrt(m))
    # 2*(1 - Phi(z)) == erfc(z / sqrt(2))
    return math.erfc(z / math.sqrt(2.0))
