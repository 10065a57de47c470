"""256-bit Fibonacci LFSR used to expand a compact seed into full challenge vectors.

Protocol-pinned constants (see FORMATS.md):

* Feedback taps {256, 254, 251, 246} (1-indexed from the input end), i.e.
  the maximal-length register whose output stream obeys

      y[k] = y[k-246] ^ y[k-251] ^ y[k-254] ^ y[k-256]

  with characteristic polynomial x^256 + x^10 + x^5 + x^2 + 1 (primitive).
* Output bit = the bit shifted out; the first 256 output bits are the seed
  bits in order.
* Bytes are assembled LSB-first: output bit j of a group of 8 carries 2^j.
* All-zero seed escapes to the fixed state 0...01 (integer 1).

Server and device must agree on every one of these; they are part of the
wire format, not tunables.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEGREE = 256
TAPS = (256, 254, 251, 246)
# 0-indexed register positions XORed into the feedback: {0, 2, 5, 10}
FEEDBACK_POSITIONS = tuple(DEGREE - t for t in TAPS)
# the output stream obeys y[k] = XOR of y[k-d] over d in TAPS, so the tap
# numbers double as the recurrence distances; min distance 246 sets the
# block size of the vectorized generator
RECURRENCE = tuple(sorted(TAPS))
POLY_ID = "lfsr256/taps-256-254-251-246/lsb-first"

EXTERNAL_SEED_BITS_COUNTER_MODE = 128
COUNTER_BITS = 128


@dataclass
class SeedMaterial:
    """Challenger-provided seed plus the device counter; concatenation is the 256-bit register load."""

    external_seed: bytes  # 16 bytes (counter mode) or 32 bytes (seed256 mode)
    counter: int | None = None  # None in seed256 mode

    def register_bits(self) -> np.ndarray:
        if self.counter is None:
            if len(self.external_seed) * 8 != DEGREE:
                raise ValueError("seed256 mode needs a 32-byte external seed")
            return bytes_to_bits(self.external_seed)
        if len(self.external_seed) * 8 != EXTERNAL_SEED_BITS_COUNTER_MODE:
            raise ValueError("counter mode needs a 16-byte external seed")
        if not 0 <= self.counter < (1 << COUNTER_BITS):
            raise ValueError("counter out of 128-bit range")
        seed_bits = bytes_to_bits(self.external_seed)
        ctr_bits = bytes_to_bits(self.counter.to_bytes(COUNTER_BITS // 8, "little"))
        return np.concatenate([seed_bits, ctr_bits])


def bytes_to_bits(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")


def bits_to_bytes(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


class Lfsr:
    """Bit-level register; the slow reference path and the single-session workhorse.

    State is the window y[t .. t+255] of the output stream. next_byte
    clocks eight times and assembles the byte LSB-first.
    """

    def __init__(self, seed_bits: np.ndarray):
        seed_bits = np.asarray(seed_bits, dtype=np.uint8) & 1
        if seed_bits.shape != (DEGREE,):
            raise ValueError(f"seed must be exactly {DEGREE} bits")
        if not seed_bits.any():
            seed_bits = np.zeros(DEGREE, dtype=np.uint8)
            seed_bits[0] = 1  # degeneracy escape: all-zero seed becomes 0...01
        self.state = seed_bits.copy()

    @classmethod
    def from_material(cls, material: SeedMaterial) -> "Lfsr":
        return cls(material.register_bits())

    def clone(self) -> "Lfsr":
        return Lfsr(self.state)

    def next_bit(self) -> int:
        s = self.state
        out = int(s[0])
        fb = 0
        for p in FEEDBACK_POSITIONS:
            fb ^= int(s[p])
        s[:-1] = s[1:]
        s[-1] = fb
        return out

    def next_byte(self) -> int:
        b = 0
        for j in range(8):
            b |= self.next_bit() << j
        return b

    def expand(self, n: int) -> np.ndarray:
        """Next n stream bytes as Z_256 values; successive calls continue the stream."""
        if n < 1:
            raise ValueError("byte count must be >= 1")
        bits = expand_stream_bits(self.state, 8 * n)
        out = np.packbits(bits[: 8 * n].reshape(n, 8), axis=1, bitorder="little").reshape(n)
        self.state = bits[8 * n : 8 * n + DEGREE].copy()
        return out.astype(np.int64)


def expand_stream_bits(state_bits: np.ndarray, n_out: int) -> np.ndarray:
    """First n_out output bits from a register window, via the linear recurrence.

    Returns the window y[0 .. n_out+DEGREE); the trailing DEGREE bits are the
    register contents after emitting n_out bits.
    """
    total = DEGREE + n_out
    y = np.empty(total, dtype=np.uint8)
    y[:DEGREE] = state_bits
    dists = sorted(RECURRENCE)
    step = dists[0]  # 246 new bits per vector op
    k = DEGREE
    while k < total:
        blk = min(step, total - k)
        dst = y[k : k + blk]
        np.bitwise_xor(y[k - dists[0] : k - dists[0] + blk], y[k - dists[1] : k - dists[1] + blk], out=dst)
        for d in dists[2:]:
            dst ^= y[k - d : k - d + blk]
        k += blk
    return y


def expand_bytes_batch(states: np.ndarray, n_bytes: int) -> tuple[np.ndarray, np.ndarray]:
    """Expand many independent streams at once.

    states: (B, 256) 0/1 array of register windows.
    Returns (bytes (B, n_bytes) uint8, final states (B, 256)).
    """
    states = np.asarray(states, dtype=np.uint8)
    if states.ndim != 2 or states.shape[1] != DEGREE:
        raise ValueError("states must be (B, 256)")
    nbits = 8 * n_bytes
    total = DEGREE + nbits
    y = np.empty((states.shape[0], total), dtype=np.uint8)
    y[:, :DEGREE] = states
    dists = sorted(RECURRENCE)
    step = dists[0]
    k = DEGREE
    while k < total:
        blk = min(step, total - k)
        dst = y[:, k : k + blk]
        np.bitwise_xor(
            y[:, k - dists[0] : k - dists[0] + blk],
            y[:, k - dists[1] : k - dists[1] + blk],
            out=dst,
        )
        for d in dists[2:]:
            dst ^= y[:, k - d : k - d + blk]
        k += blk
    out = np.packbits(
        y[:, :nbits].reshape(states.shape[0], n_bytes, 8), axis=2, bitorder="little"
    ).reshape(states.shape[0], n_bytes)
    return out, y[:, nbits : nbits + DEGREE].copy()


def register_states_for(seeds: np.ndarray, counters: np.ndarray | None) -> np.ndarray:
    """Initial register windows for a batch of sessions.

    seeds: (B, 16) or (B, 32) uint8 external seeds; counters: (B,) uint64-ish
    ints or None in seed256 mode. Applies the all-zero escape rule per row.
    """
    seeds = np.asarray(seeds, dtype=np.uint8)
    seed_bits = np.unpackbits(seeds, axis=1, bitorder="little")
    if counters is None:
        states = seed_bits
    else:
        ctr_bytes = np.zeros((seeds.shape[0], COUNTER_BITS // 8), dtype=np.uint8)
        for i, c in enumerate(counters):
            ctr_bytes[i] = np.frombuffer(int(c).to_bytes(COUNTER_BITS // 8, "little"), dtype=np.uint8)
        states = np.concatenate([seed_bits, np.unpackbits(ctr_bytes, axis=1, bitorder="little")], axis=1)
    if states.shape[1] != DEGREE:
        raise ValueError("seed material does not fill the 256-bit register")
    dead = ~states.any(axis=1)
    if dead.any():
        states = states.copy()
        states[dead, 0] = 1
    return states
