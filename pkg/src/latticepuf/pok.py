"""Behavioral SRAM POK model: fixed power-up ground truth, i.i.d. per-read bit flips."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PokInstance:
    enrollment_bits: np.ndarray  # ground-truth power-up values
    ber: float  # per-read flip probability, homogeneous across cells

    def __post_init__(self):
        if not 0.0 <= self.ber <= 0.5:
            raise ValueError("BER must be in [0, 0.5]")
        object.__setattr__(
            self, "enrollment_bits", np.ascontiguousarray(self.enrollment_bits, dtype=np.uint8)
        )

    @property
    def n_cells(self) -> int:
        return self.enrollment_bits.size


def pok_new(n_cells: int, ber: float, rng: np.random.Generator) -> PokInstance:
    if n_cells < 1:
        raise ValueError("need at least one cell")
    return PokInstance(rng.integers(0, 2, size=n_cells, dtype=np.uint8), ber)


def pok_read(inst: PokInstance, rng: np.random.Generator) -> np.ndarray:
    """One noisy read: enrollment XOR Bernoulli(ber) flips, fresh each call."""
    return pok_read_batch(inst, 1, rng)[0]


def pok_read_batch(inst: PokInstance, n_reads: int, rng: np.random.Generator) -> np.ndarray:
    if inst.ber == 0.0:
        return np.tile(inst.enrollment_bits, (n_reads, 1))
    flips = (rng.random((n_reads, inst.n_cells)) < inst.ber).astype(np.uint8)
    return inst.enrollment_bits[None, :] ^ flips
