"""Verifier: enrollment registry, seed-expanded challenge generation, authentication decision.

The server knows each device's secret and one noise vector sampled at
enrollment, so it can build sessions b' = <a', s> + <e, x> + r*floor(q/2)
without ever materializing the m x n public matrix, and can precompute the
exact expected response by decrypting its own ciphertexts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lfsr, lwe, zq
from .device import (
    SEED_BYTES_COUNTER_MODE,
    SEED_BYTES_SEED256_MODE,
    CompactChallenge,
    batch_responses,
)
from .lwe import LweParams, SecretKey

REGISTRY_HEADER = "# latticepuf-registry v1"
DEFAULT_TAU = 0.2


@dataclass
class EnrollmentRecord:
    device_id: str
    sk: SecretKey
    e: np.ndarray  # (m,) noise vector sampled at enrollment, reused per session
    expected_counter: int
    params: LweParams
    seed_mode: str = "counter128"  # or "seed256"

    def __post_init__(self):
        self.e = np.ascontiguousarray(self.e, dtype=np.int64)
        if self.e.shape != (self.params.m,):
            raise ValueError("noise vector length does not match m")
        if self.seed_mode not in ("counter128", "seed256"):
            raise ValueError(f"unknown seed mode {self.seed_mode!r}")

    @property
    def seed_bytes(self) -> int:
        return SEED_BYTES_COUNTER_MODE if self.seed_mode == "counter128" else SEED_BYTES_SEED256_MODE


@dataclass
class ChallengeSession:
    challenge: CompactChallenge
    expected_response: np.ndarray  # server-side decryption of its own ciphertexts
    plaintexts: np.ndarray  # the r bits actually encrypted
    counter_used: int


@dataclass
class BatchSessions:
    """Column-wise view of many sessions for the Monte Carlo harnesses."""

    seeds: np.ndarray  # (S, seed_bytes) uint8
    counters: list[int] | None
    b: np.ndarray  # (S, t)
    plaintexts: np.ndarray  # (S, t)
    expected: np.ndarray  # (S, t)


class DuplicateDeviceError(ValueError):
    pass


class Server:
    def __init__(self):
        self.registry: dict[str, EnrollmentRecord] = {}

    def enroll(
        self,
        device_id: str,
        sk: SecretKey,
        rng: np.random.Generator,
        counter: int = 0,
        seed_mode: str = "counter128",
    ) -> EnrollmentRecord:
        """Trusted provisioning: record the secret, sample the session noise vector."""
        if device_id in self.registry:
            raise DuplicateDeviceError(f"device {device_id!r} already enrolled")
        params = sk.params
        e = zq.sample_discrete_gaussian(params.alpha, params.q, rng, size=params.m)
        rec = EnrollmentRecord(device_id, sk, e, counter, params, seed_mode)
        self.registry[device_id] = rec
        return rec

    def record(self, device_id: str) -> EnrollmentRecord:
        return self.registry[device_id]

    def gen_session(self, device_id: str, t_bits: int, rng: np.random.Generator) -> ChallengeSession:
        rec = self.registry[device_id]
        batch = gen_sessions_batch(rec, 1, t_bits, rng, advance=True)
        ch = CompactChallenge(batch.seeds[0].tobytes(), batch.b[0])
        counter_used = batch.counters[0] if batch.counters is not None else rec.expected_counter - 1
        return ChallengeSession(ch, batch.expected[0], batch.plaintexts[0], counter_used)

    def resync(self, device_id: str, device_counter: int) -> None:
        """Adopt the device's reported counter (plumbing for desynchronized pairs)."""
        self.registry[device_id].expected_counter = int(device_counter)

    def save(self, path: str | Path) -> None:
        lines = [REGISTRY_HEADER]
        for rec in self.registry.values():
            p = rec.params
            s_hex = lfsr.bits_to_bytes(rec.sk.packed).hex()
            e_hex = bytes(int(v) for v in rec.e).hex()
            lines.append(
                "\t".join(
                    [
                        rec.device_id,
                        rec.seed_mode,
                        str(p.n),
                        str(p.q),
                        str(p.m),
                        repr(p.alpha),
                        s_hex,
                        e_hex,
                        str(rec.expected_counter),
                    ]
                )
            )
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Server":
        text = Path(path).read_text().splitlines()
        if not text or text[0] != REGISTRY_HEADER:
            raise ValueError("not a latticepuf registry file")
        srv = cls()
        for line in text[1:]:
            if not line.strip():
                continue
            device_id, seed_mode, n, q, m, alpha, s_hex, e_hex, counter = line.split("\t")
            params = LweParams(int(n), int(q), int(m), float(alpha))
            packed = lfsr.bytes_to_bits(bytes.fromhex(s_hex))[: params.secret_bits]
            sk = SecretKey.from_packed(packed, params)
            e = np.frombuffer(bytes.fromhex(e_hex), dtype=np.uint8).astype(np.int64)
            srv.registry[device_id] = EnrollmentRecord(
                device_id, sk, e, int(counter), params, seed_mode
            )
        return srv


def gen_sessions_batch(
    rec: EnrollmentRecord,
    n_sessions: int,
    t_bits: int,
    rng: np.random.Generator,
    advance: bool = True,
    x_override: np.ndarray | None = None,
) -> BatchSessions:
    """Generate sessions with known plaintexts and expected responses.

    x_override forces the binary combination vectors (test hook); shape
    (S, t, m).
    """
    if t_bits < 1:
        raise ValueError("session length must be >= 1")
    params = rec.params
    q = params.q
    if q != 256:
        raise ValueError("seed-expanded sessions are defined for q=256 only")
    S = n_sessions
    seeds = rng.integers(0, 256, size=(S, rec.seed_bytes), dtype=np.uint8)
    counters = (
        [rec.expected_counter + i for i in range(S)] if rec.seed_mode == "counter128" else None
    )
    states = lfsr.register_states_for(seeds, counters)
    a_bytes, _ = lfsr.expand_bytes_batch(states, t_bits * params.n)
    A = a_bytes.reshape(S, t_bits, params.n)
    r = rng.integers(0, 2, size=(S, t_bits), dtype=np.int64)
    if x_override is None:
        x = rng.integers(0, 2, size=(S, t_bits, params.m), dtype=np.uint8)
    else:
        x = np.asarray(x_override, dtype=np.uint8)
        if x.shape != (S, t_bits, params.m):
            raise ValueError("x_override has the wrong shape")
    dots = (A.astype(np.float64) @ rec.sk.s.astype(np.float64)).astype(np.int64) % q
    acc = (x.astype(np.float64) @ rec.e.astype(np.float64)).astype(np.int64) % q
    b = (dots + acc + r * (q // 2)) % q
    expected = lwe.quantize_vec((b - dots) % q, q)
    if advance:
        rec.expected_counter += S
    return BatchSessions(seeds, counters, b, r, expected)


@dataclass
class PopulationSessions:
    """One session per enrollment record, stacked row-wise."""

    seeds: np.ndarray  # (D, seed_bytes)
    counters: list[int] | None
    b: np.ndarray  # (D, t)
    plaintexts: np.ndarray  # (D, t)
    expected: np.ndarray  # (D, t)


def respond_with_secrets(
    s_matrix: np.ndarray,
    params: LweParams,
    seeds: np.ndarray,
    counters: list[int] | None,
    b: np.ndarray,
) -> np.ndarray:
    """Session responses with a distinct secret per row; the uniqueness workhorse."""
    states = lfsr.register_states_for(seeds, counters)
    t = b.shape[1]
    a_bytes, _ = lfsr.expand_bytes_batch(states, t * params.n)
    A = a_bytes.reshape(states.shape[0], t, params.n).astype(np.float64)
    dots = (A @ s_matrix.astype(np.float64)[:, :, None])[:, :, 0].astype(np.int64) % params.q
    return lwe.quantize_vec((b - dots) % params.q, params.q)


def gen_population_sessions(
    recs: list[EnrollmentRecord],
    t_bits: int,
    rng: np.random.Generator,
    advance: bool = True,
) -> PopulationSessions:
    """One t-bit session for each record, with LFSR streams expanded in one batch.

    Intended to be called on modest chunks of the population (the x draws
    alone are D*t*m bytes); stats and acceptance harnesses chunk externally.
    """
    if not recs:
        raise ValueError("empty record list")
    params = recs[0].params
    if params.q != 256:
        raise ValueError("seed-expanded sessions are defined for q=256 only")
    if any(r.params != params or r.seed_mode != recs[0].seed_mode for r in recs):
        raise ValueError("population records must share params and seed mode")
    D = len(recs)
    q = params.q
    seeds = rng.integers(0, 256, size=(D, recs[0].seed_bytes), dtype=np.uint8)
    counters = (
        [r.expected_counter for r in recs] if recs[0].seed_mode == "counter128" else None
    )
    states = lfsr.register_states_for(seeds, counters)
    a_bytes, _ = lfsr.expand_bytes_batch(states, t_bits * params.n)
    A = a_bytes.reshape(D, t_bits, params.n).astype(np.float64)
    s_matrix = np.stack([r.sk.s for r in recs]).astype(np.float64)
    e_matrix = np.stack([r.e for r in recs]).astype(np.float64)
    r_bits = rng.integers(0, 2, size=(D, t_bits), dtype=np.int64)
    x = rng.integers(0, 2, size=(D, t_bits, params.m), dtype=np.uint8)
    dots = (A @ s_matrix[:, :, None])[:, :, 0].astype(np.int64) % q
    acc = (x.astype(np.float64) @ e_matrix[:, :, None])[:, :, 0].astype(np.int64) % q
    b = (dots + acc + r_bits * (q // 2)) % q
    expected = lwe.quantize_vec((b - dots) % q, q)
    if advance:
        for r in recs:
            r.expected_counter += 1
    return PopulationSessions(seeds, counters, b, r_bits.astype(np.uint8), expected)


def verify(expected: np.ndarray, actual: np.ndarray, tau: float = DEFAULT_TAU) -> tuple[bool, float]:
    """Accept iff the fractional Hamming distance is at most tau."""
    expected = np.asarray(expected, dtype=np.uint8)
    actual = np.asarray(actual, dtype=np.uint8)
    if expected.shape != actual.shape:
        raise ValueError("response length mismatch")
    hd = float(np.count_nonzero(expected != actual)) / expected.size
    return hd <= tau, hd


def expected_responses_batch(rec: EnrollmentRecord, batch: BatchSessions) -> np.ndarray:
    """Recompute expected responses from the record's secret (cross-check path)."""
    return batch_responses(
        rec.sk.s, rec.params.q, rec.params.n, batch.seeds, batch.counters, batch.b
    )
