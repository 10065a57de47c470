"""Arithmetic over Z_q (q a power of two), seeded randomness, and the rounded-Gaussian error sampler.

Every sampling routine takes an explicit numpy Generator; nothing in the
package touches global RNG state, so any experiment replays bit-exactly
from its seed.
"""

from __future__ import annotations

import math

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator from a 64-bit seed."""
    return np.random.default_rng(seed)


def fork_rng(rng: np.random.Generator, n: int) -> list[np.random.Generator]:
    """Independent child generators for parallel simulation legs."""
    return rng.spawn(n)


def check_modulus(q: int) -> int:
    """Validate q = 2^k, k >= 1, and return k."""
    if q < 2 or q & (q - 1):
        raise ValueError(f"modulus must be a power of two >= 2, got {q}")
    return q.bit_length() - 1


def gaussian_sigma(alpha: float, q: int) -> float:
    """Standard deviation alpha*q/sqrt(2*pi) of the continuous base distribution."""
    return alpha * q / math.sqrt(2.0 * math.pi)


def sample_discrete_gaussian(alpha: float, q: int, rng: np.random.Generator, size=None):
    """Rounded Gaussian on Z_q: round N(0, sigma^2) to the nearest integer mod q.

    Rounding is ties-to-even (np.rint), fixed for determinism; alpha=0
    degenerates to the constant 0.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    check_modulus(q)
    if alpha == 0:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    sigma = gaussian_sigma(alpha, q)
    raw = np.rint(rng.normal(0.0, sigma, size=size)).astype(np.int64)
    return raw % q if size is not None else int(raw) % q


def sample_uniform_zq(q: int, rng: np.random.Generator, size=None):
    """i.i.d. uniform elements of Z_q."""
    check_modulus(q)
    out = rng.integers(0, q, size=size, dtype=np.int64)
    return int(out) if size is None else out


def sample_uniform_bits(n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform bits as a uint8 0/1 array."""
    if n < 0:
        raise ValueError("bit count must be >= 0")
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def signed_residue(v, q: int):
    """Map Z_q value(s) to the signed representative in (-q/2, q/2]."""
    v = np.asarray(v, dtype=np.int64)
    out = np.where(v > q // 2, v - q, v)
    return out if out.shape else int(out)


def bits_to_zq(bits: np.ndarray, q: int) -> np.ndarray:
    """Pack groups of log2(q) bits, LSB first, into Z_q values.

    Bit j of each group carries weight 2^j; the inverse of zq_to_bits.
    """
    k = check_modulus(q)
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape[-1] % k:
        raise ValueError(f"bit length {bits.shape[-1]} not a multiple of log2(q)={k}")
    groups = bits.reshape(*bits.shape[:-1], -1, k)
    weights = 1 << np.arange(k, dtype=np.int64)
    return groups @ weights


def zq_to_bits(values: np.ndarray, q: int) -> np.ndarray:
    """Unpack Z_q values into log2(q)-bit groups, LSB first."""
    k = check_modulus(q)
    values = np.asarray(values, dtype=np.int64)
    if np.any((values < 0) | (values >= q)):
        raise ValueError("value out of range for Z_q")
    shifts = np.arange(k, dtype=np.int64)
    bits = (values[..., None] >> shifts) & 1
    return bits.reshape(*values.shape[:-1], -1).astype(np.uint8) if values.ndim else bits.astype(np.uint8)
