"""The PUF device: POK-backed secret reconstruction, the session counter, response generation.

The only public query surface takes (external seed, b values); there is no
way for a caller to hand the device a full ciphertext. That interface shape
is the active-attack countermeasure. A raw decryption oracle exists solely
so the attack demo can exercise the vulnerability, and must be enabled
explicitly at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fe, lfsr, lwe, pok
from .fe import FeConfig, HelperData
from .lwe import LweParams, SecretKey

SEED_BYTES_COUNTER_MODE = 16
SEED_BYTES_SEED256_MODE = 32


def _require_byte_modulus(q: int) -> None:
    # the stream expander emits whole bytes; other moduli use the reference path
    if q != 256:
        raise ValueError("seed-expanded sessions are defined for q=256 only")


@dataclass
class CompactChallenge:
    """Wire-level session challenge: external seed plus one b value per response bit."""

    external_seed: bytes
    b_values: np.ndarray

    def __post_init__(self):
        if len(self.external_seed) not in (SEED_BYTES_COUNTER_MODE, SEED_BYTES_SEED256_MODE):
            raise ValueError("external seed must be 16 bytes (counter mode) or 32 bytes (seed256)")
        b = np.ascontiguousarray(self.b_values, dtype=np.int64)
        if b.ndim != 1 or b.size < 1:
            raise ValueError("need at least one b value")
        self.b_values = b

    @property
    def t(self) -> int:
        return self.b_values.size

    @property
    def counter_mode(self) -> bool:
        return len(self.external_seed) == SEED_BYTES_COUNTER_MODE


def expand_challenge_vectors(
    seed: bytes, counter: int | None, t: int, n: int
) -> np.ndarray:
    """The t full-size a' vectors of a session, (t, n) in Z_256 byte order."""
    reg = lfsr.SeedMaterial(seed, counter).register_bits()
    gen = lfsr.Lfsr(reg)
    return gen.expand(t * n).reshape(t, n)


def _session_responses(
    s: np.ndarray, q: int, a_matrix: np.ndarray, b_values: np.ndarray
) -> np.ndarray:
    dots = (a_matrix.astype(np.float64) @ s.astype(np.float64)).astype(np.int64) % q
    return lwe.quantize_vec((b_values - dots) % q, q)


def batch_responses(
    s: np.ndarray,
    q: int,
    n: int,
    seeds: np.ndarray,
    counters: np.ndarray | None,
    b_matrix: np.ndarray,
) -> np.ndarray:
    """Responses for many sessions at once; bit-identical to Device.respond.

    seeds: (S, 16|32) uint8; counters: (S,) or None (seed256 mode);
    b_matrix: (S, t). Returns (S, t) response bits.
    """
    _require_byte_modulus(q)
    states = lfsr.register_states_for(seeds, counters)
    t = b_matrix.shape[1]
    a_bytes, _ = lfsr.expand_bytes_batch(states, t * n)
    A = a_bytes.reshape(states.shape[0], t, n)
    dots = (A.astype(np.float64) @ s.astype(np.float64)).astype(np.int64) % q
    return lwe.quantize_vec((b_matrix - dots) % q, q)


@dataclass
class Device:
    params: LweParams
    pok_cells: pok.PokInstance | None
    helper: HelperData | None
    fe_config: FeConfig | None
    counter: int = 0
    unsafe_raw_oracle: bool = False
    sk: SecretKey | None = field(default=None, repr=False)

    @classmethod
    def provision(
        cls,
        params: LweParams,
        fe_config: FeConfig,
        rng: np.random.Generator,
        ber: float | None = None,
        unsafe_raw_oracle: bool = False,
    ) -> tuple["Device", SecretKey]:
        """Manufacture a device: POK cells, FE enrollment, derived secret.

        Returns the device and the enrolled secret (the provisioning-time
        value the verifier records). ber defaults to the FE config's rated
        raw BER.
        """
        if params.secret_bits != fe_config.key_bits:
            raise ValueError("FE key length does not match the packed secret length")
        if ber is None:
            ber = fe_config.ber_percent / 100.0
        cells = pok.pok_new(fe_config.pok_bits, ber, rng)
        key, helper = fe.fe_enroll(cells.enrollment_bits, fe_config, rng)
        sk = SecretKey.from_packed(key, params)
        dev = cls(params, cells, helper, fe_config, unsafe_raw_oracle=unsafe_raw_oracle)
        return dev, sk

    def power_up(self, rng: np.random.Generator) -> None:
        """Reconstruct the secret from a fresh noisy POK read; raises ReconstructFailure."""
        if self.pok_cells is None:
            raise RuntimeError("device has no POK backing (secret installed directly)")
        reading = pok.pok_read(self.pok_cells, rng)
        key = fe.fe_reconstruct(reading, self.helper, self.fe_config)
        self.sk = SecretKey.from_packed(key, self.params)

    @property
    def powered(self) -> bool:
        return self.sk is not None

    def respond(self, ch: CompactChallenge) -> tuple[np.ndarray, int]:
        """Answer one session; the counter increments once, after response generation."""
        if self.sk is None:
            raise RuntimeError("device is not powered up")
        _require_byte_modulus(self.params.q)
        counter = self.counter if ch.counter_mode else None
        A = expand_challenge_vectors(ch.external_seed, counter, ch.t, self.params.n)
        resp = _session_responses(self.sk.s, self.params.q, A, ch.b_values)
        used = self.counter
        self.counter += 1
        return resp, used

    def respond_session_batch(self, seeds: np.ndarray, b_matrix: np.ndarray) -> np.ndarray:
        """Answer many sessions in counter order; advances the counter by the batch size."""
        if self.sk is None:
            raise RuntimeError("device is not powered up")
        S = b_matrix.shape[0]
        seeds = np.asarray(seeds, dtype=np.uint8)
        counters = (
            [self.counter + i for i in range(S)]
            if seeds.shape[1] == SEED_BYTES_COUNTER_MODE
            else None
        )
        out = batch_responses(self.sk.s, self.params.q, self.params.n, seeds, counters, b_matrix)
        self.counter += S
        return out

    def raw_decrypt(self, a: np.ndarray, b: int) -> int:
        """Debug-only decryption oracle for the active-attack demonstration."""
        if not self.unsafe_raw_oracle:
            raise PermissionError("raw decryption oracle is disabled on this device")
        if self.sk is None:
            raise RuntimeError("device is not powered up")
        return lwe.decrypt_bit(self.sk, lwe.Ciphertext(np.asarray(a), b))


def device_power_up(
    pok_cells: pok.PokInstance,
    helper: HelperData,
    fe_config: FeConfig,
    params: LweParams,
    rng: np.random.Generator,
    counter: int = 0,
) -> Device:
    """Assemble and power a device from stored parts; ReconstructFailure propagates."""
    dev = Device(params, pok_cells, helper, fe_config, counter=counter)
    dev.power_up(rng)
    return dev
