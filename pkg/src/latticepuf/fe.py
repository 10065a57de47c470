"""Code-offset fuzzy extractor over concatenated codes (repetition inner, shortened BCH outer).

Stabilizes the 1280-bit packed secret against noisy POK reads. Helper data
is codeword XOR enrollment reading; it pins no key bit on its own because
the codeword is a one-time pad of a fresh uniform key.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from math import comb

import numpy as np

from . import bch
from .bch import BchCode


class ReconstructFailure(Exception):
    """Key reconstruction failed in at least one block (counted, not fatal)."""


@dataclass(frozen=True)
class RepCode:
    r: int  # odd repetition factor; [r, 1, (r-1)/2]

    def __post_init__(self):
        if self.r < 1 or self.r % 2 == 0:
            raise ValueError("repetition factor must be odd and >= 1")

    @property
    def t(self) -> int:
        return (self.r - 1) // 2


def rep_encode(bits: np.ndarray, r: int) -> np.ndarray:
    return np.repeat(np.asarray(bits, dtype=np.uint8), r)


def rep_decode(bits: np.ndarray, r: int) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[-1] % r:
        raise ValueError(f"length {bits.shape[-1]} not divisible by r={r}")
    groups = bits.reshape(*bits.shape[:-1], -1, r)
    return (groups.sum(axis=-1) > r // 2).astype(np.uint8)


@dataclass(frozen=True)
class FeConfig:
    """One row of the code table, keyed by the raw BER percent it is sized for."""

    ber_percent: int
    outer: BchCode
    inner: RepCode
    blocks: int = 10
    key_bits: int = 1280

    def __post_init__(self):
        if self.key_bits % self.blocks:
            raise ValueError("key bits must split evenly across blocks")
        if self.key_bits_per_block > self.outer.k_s:
            raise ValueError("outer code too small for the per-block key share")

    @property
    def key_bits_per_block(self) -> int:
        return self.key_bits // self.blocks

    @property
    def pad_bits(self) -> int:
        """Zero bits appended to each block's key share to fill the outer message."""
        return self.outer.k_s - self.key_bits_per_block

    @property
    def block_pok_bits(self) -> int:
        return self.outer.n_s * self.inner.r

    @property
    def pok_bits(self) -> int:
        return self.blocks * self.block_pok_bits


# Raw-BER design points. The 5% row's [218, 128, 11] exterior comes from
# parent (255, 171, 11) shortened to (218, 134) with 6 zero pad bits; the
# other rows shorten to exactly 128 message bits.
CONFIGS: dict[int, FeConfig] = {
    1: FeConfig(1, BchCode(t=14, shorten=19), RepCode(1)),
    5: FeConfig(5, BchCode(t=11, shorten=37), RepCode(3)),
    10: FeConfig(10, BchCode(t=12, shorten=35), RepCode(5)),
    15: FeConfig(15, BchCode(t=15, shorten=11), RepCode(7)),
}

_HELPER_MAGIC = struct.Struct("<II")  # config id (ber percent), block count


@dataclass(frozen=True)
class HelperData:
    mask: np.ndarray  # pok_bits of codeword XOR enrollment reading
    config_id: int
    blocks: int

    def to_bytes(self) -> bytes:
        header = _HELPER_MAGIC.pack(self.config_id, self.blocks)
        return header + np.packbits(self.mask, bitorder="little").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "HelperData":
        config_id, blocks = _HELPER_MAGIC.unpack_from(data)
        if config_id not in CONFIGS:
            raise ValueError(f"unknown helper-data config id {config_id}")
        cfg = CONFIGS[config_id]
        if blocks != cfg.blocks:
            raise ValueError("block count does not match config")
        mask = np.unpackbits(
            np.frombuffer(data, dtype=np.uint8, offset=_HELPER_MAGIC.size),
            bitorder="little",
        )[: cfg.pok_bits]
        if mask.size != cfg.pok_bits:
            raise ValueError("helper data truncated")
        return cls(mask, config_id, blocks)


def fe_enroll(
    pok_reading: np.ndarray, config: FeConfig, rng: np.random.Generator
) -> tuple[np.ndarray, HelperData]:
    """Draw a fresh uniform key and publish mask = encode(key) XOR reading."""
    pok_reading = np.asarray(pok_reading, dtype=np.uint8)
    if pok_reading.shape != (config.pok_bits,):
        raise ValueError(f"reading must be {config.pok_bits} bits")
    key = rng.integers(0, 2, size=config.key_bits, dtype=np.uint8)
    msgs = np.zeros((config.blocks, config.outer.k_s), dtype=np.uint8)
    msgs[:, : config.key_bits_per_block] = key.reshape(config.blocks, -1)
    outer_cw = bch.encode_batch(msgs, config.outer)
    codeword = np.repeat(outer_cw, config.inner.r, axis=1).reshape(-1)
    mask = codeword ^ pok_reading
    return key, HelperData(mask, config.ber_percent, config.blocks)


def fe_reconstruct(noisy_reading: np.ndarray, helper: HelperData, config: FeConfig) -> np.ndarray:
    """Recover the enrolled key from a noisy reading, or raise ReconstructFailure."""
    keys, ok = fe_reconstruct_batch(np.asarray(noisy_reading, dtype=np.uint8)[None, :], helper, config)
    if not ok[0]:
        raise ReconstructFailure("outer decode failed in at least one block")
    return keys[0]


def fe_reconstruct_batch(
    noisy_readings: np.ndarray, helper: HelperData, config: FeConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Batched reconstruction; returns (keys (B, key_bits), ok (B,))."""
    noisy = np.asarray(noisy_readings, dtype=np.uint8)
    if noisy.ndim != 2 or noisy.shape[1] != config.pok_bits:
        raise ValueError(f"readings must be (B, {config.pok_bits})")
    if helper.config_id != config.ber_percent:
        raise ValueError("helper data belongs to a different config")
    B = noisy.shape[0]
    offset = noisy ^ helper.mask[None, :]
    inner_out = rep_decode(offset, config.inner.r)  # (B, blocks * n_s)
    words = inner_out.reshape(B * config.blocks, config.outer.n_s)
    msgs, _, ok_blocks = bch.decode_batch(words, config.outer)
    msgs = msgs.reshape(B, config.blocks, config.outer.k_s)
    ok = ok_blocks.reshape(B, config.blocks).all(axis=1)
    if config.pad_bits:
        # decoded pad bits must be zero; a violation marks a miscorrected block
        ok &= ~msgs[:, :, config.key_bits_per_block :].any(axis=(1, 2))
    keys = msgs[:, :, : config.key_bits_per_block].reshape(B, config.key_bits)
    return keys, ok


def fe_failure_rate(raw_ber: float, config: FeConfig) -> float:
    """Analytic reconstruction-failure probability under i.i.d. cell errors.

    Inner majority failure p_in feeds an exact binomial tail beyond the outer
    correction capacity, combined across independent blocks.
    """
    if not 0 <= raw_ber <= 0.5:
        raise ValueError("raw BER must be in [0, 0.5]")
    r = config.inner.r
    p_in = sum(comb(r, i) * raw_ber**i * (1 - raw_ber) ** (r - i) for i in range(r // 2 + 1, r + 1))
    n_s, t = config.outer.n_s, config.outer.t
    p_block = sum(
        comb(n_s, i) * p_in**i * (1 - p_in) ** (n_s - i) for i in range(t + 1, n_s + 1)
    )
    return 1.0 - (1.0 - p_block) ** config.blocks
