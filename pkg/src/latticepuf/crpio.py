"""Bit-exact serialization: CRP datasets, session frames, challenge-size accounting.

Dataset files are line-oriented text (diff-able, ML-harness friendly): a
single JSON manifest line, then one record per line. The manifest's sha256
covers every record byte after it, so truncation or tampering is detected
before anything parses. Formats are specified in FORMATS.md; the dataset
files carry no key material by construction.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import lfsr, lwe, zq
from .device import SEED_BYTES_COUNTER_MODE, CompactChallenge, Device
from .lwe import LweParams
from .server import Server, gen_sessions_batch

FORMAT_VERSION = 1


@dataclass(frozen=True)
class DatasetManifest:
    version: int
    form: str  # "compact" | "expanded"
    n: int
    q: int
    m: int
    alpha: float
    lfsr_poly: str
    challenge_source: str  # "prng" | "ciphertext"
    count: int
    seed: int | None
    sha256: str

    def params(self) -> LweParams:
        return LweParams(self.n, self.q, self.m, self.alpha)

    def to_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_line(cls, line: str) -> "DatasetManifest":
        data = json.loads(line)
        if data.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported dataset version {data.get('version')}")
        return cls(**data)


@dataclass
class CrpRecord:
    """One CRP. Compact records are single-bit sessions, so (seed, counter) pins the expansion."""

    response: int
    seed: bytes | None = None
    counter: int | None = None
    b: int | None = None
    challenge_bits: np.ndarray | None = None

    @property
    def form(self) -> str:
        return "compact" if self.challenge_bits is None else "expanded"


def _record_line(rec: CrpRecord) -> str:
    if rec.form == "compact":
        return f"{rec.seed.hex()}\t{rec.counter}\t{rec.b:02x}\t{rec.response}"
    bits = "".join("1" if v else "0" for v in rec.challenge_bits)
    return f"{bits}\t{rec.response}"


def _parse_line(line: str, form: str) -> CrpRecord:
    parts = line.split("\t")
    if form == "compact":
        seed_hex, counter, b_hex, resp = parts
        return CrpRecord(int(resp), bytes.fromhex(seed_hex), int(counter), int(b_hex, 16))
    bits_str, resp = parts
    bits = np.frombuffer(bits_str.encode(), dtype=np.uint8) - ord("0")
    return CrpRecord(int(resp), challenge_bits=bits.astype(np.uint8))


def export_crps(
    srv: Server,
    dev: Device,
    device_id: str,
    count: int,
    form: str,
    path: str | Path,
    rng: np.random.Generator,
    chunk: int = 4096,
) -> DatasetManifest:
    """Export device-answered CRPs, one single-bit session per record.

    The device (not the verifier's expectation) supplies the response bit, so
    decryption errors land in the dataset exactly as an attacker would see
    them.
    """
    if form not in ("compact", "expanded"):
        raise ValueError("form must be 'compact' or 'expanded'")
    rec = srv.record(device_id)
    params = rec.params
    lines: list[str] = []
    for lo in range(0, count, chunk):
        size = min(chunk, count - lo)
        batch = gen_sessions_batch(rec, size, 1, rng)
        responses = dev.respond_session_batch(batch.seeds, batch.b)
        if form == "expanded":
            counters = batch.counters if batch.counters is not None else [None] * size
            states = lfsr.register_states_for(batch.seeds, counters)
            a_bytes, _ = lfsr.expand_bytes_batch(states, params.n)
            all_bits = _challenge_bit_matrix(a_bytes, batch.b[:, 0], params)
            for i in range(size):
                lines.append(_record_line(CrpRecord(int(responses[i, 0]), challenge_bits=all_bits[i])))
        else:
            for i in range(size):
                lines.append(
                    _record_line(
                        CrpRecord(
                            int(responses[i, 0]),
                            batch.seeds[i].tobytes(),
                            counters_of(batch, i),
                            int(batch.b[i, 0]),
                        )
                    )
                )
    return _write_dataset(path, lines, form, params, "prng", count)


def counters_of(batch, i: int) -> int | None:
    return batch.counters[i] if batch.counters is not None else None


def export_reference_crps(
    sk: lwe.SecretKey,
    e: np.ndarray,
    count: int,
    path: str | Path,
    rng: np.random.Generator,
    chunk: int = 4096,
) -> DatasetManifest:
    """Expanded-form export from the reference encryption path (full public key).

    Challenges follow the exact ciphertext distribution instead of the PRNG
    relaxation; this is the expensive baseline the compact design replaces.
    """
    params = sk.params
    A = zq.sample_uniform_zq(params.q, rng, size=(params.m, params.n))
    b_pk = (A @ sk.s + np.asarray(e, dtype=np.int64)) % params.q
    pk = lwe.PublicKey(A, b_pk, params)
    lines: list[str] = []
    for lo in range(0, count, chunk):
        size = min(chunk, count - lo)
        r = rng.integers(0, 2, size=size, dtype=np.int64)
        a_ct, b_ct = lwe.encrypt_bits_batch(pk, r, rng)
        responses = lwe.decrypt_bits_batch(sk, a_ct, b_ct)
        bits = _challenge_bit_matrix(a_ct, b_ct, params)
        for i in range(size):
            lines.append(_record_line(CrpRecord(int(responses[i]), challenge_bits=bits[i])))
    return _write_dataset(path, lines, "expanded", params, "ciphertext", count)


def _challenge_bit_matrix(a: np.ndarray, b: np.ndarray, params: LweParams) -> np.ndarray:
    """(B, (n+1)*log2q) challenge bits in pack_challenge order."""
    vals = np.concatenate([np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)[:, None]], axis=1)
    k = params.log2q
    shifts = np.arange(k, dtype=np.int64)
    bits = ((vals[:, :, None] >> shifts) & 1).astype(np.uint8)
    return bits.reshape(vals.shape[0], -1)


def _write_dataset(
    path: str | Path,
    lines: list[str],
    form: str,
    params: LweParams,
    source: str,
    count: int,
) -> DatasetManifest:
    body = "".join(line + "\n" for line in lines).encode()
    manifest = DatasetManifest(
        version=FORMAT_VERSION,
        form=form,
        n=params.n,
        q=params.q,
        m=params.m,
        alpha=params.alpha,
        lfsr_poly=lfsr.POLY_ID,
        challenge_source=source,
        count=count,
        seed=None,
        sha256=hashlib.sha256(body).hexdigest(),
    )
    with open(path, "wb") as fh:
        fh.write(manifest.to_line().encode() + b"\n")
        fh.write(body)
    return manifest


def import_crps(path: str | Path) -> tuple[DatasetManifest, list[CrpRecord]]:
    """Parse and integrity-check a dataset; rejects hash or polynomial-id mismatches."""
    raw = Path(path).read_bytes()
    head, _, body = raw.partition(b"\n")
    manifest = DatasetManifest.from_line(head.decode())
    if manifest.challenge_source == "prng" and manifest.lfsr_poly != lfsr.POLY_ID:
        raise ValueError(
            f"dataset stream polynomial {manifest.lfsr_poly!r} does not match this build's {lfsr.POLY_ID!r}"
        )
    if hashlib.sha256(body).hexdigest() != manifest.sha256:
        raise ValueError("manifest hash mismatch: dataset corrupted or modified")
    lines = body.decode().splitlines()
    if len(lines) != manifest.count:
        raise ValueError(f"expected {manifest.count} records, found {len(lines)}")
    return manifest, [_parse_line(line, manifest.form) for line in lines]


def expand_record(rec: CrpRecord, params: LweParams) -> np.ndarray:
    """Regenerate the full challenge bits of a compact record via the pinned stream."""
    if rec.form != "compact":
        return rec.challenge_bits
    gen = lfsr.Lfsr(lfsr.SeedMaterial(rec.seed, rec.counter).register_bits())
    a = gen.expand(params.n)
    return _challenge_bit_matrix(a[None, :], np.array([rec.b]), params)[0]


# --- session wire format --------------------------------------------------

def encode_session_frame(ch: CompactChallenge, counter_check: int | None = None) -> bytes:
    """seed || counter-check (counter mode only) || t (2B LE) || b values.

    The counter-check byte is the low byte of the counter the challenger
    targeted; a desynchronized device can detect the mismatch before
    answering garbage.
    """
    out = bytearray(ch.external_seed)
    if ch.counter_mode:
        if counter_check is None:
            raise ValueError("counter mode frames need a counter-check byte")
        out.append(counter_check & 0xFF)
    out += ch.t.to_bytes(2, "little")
    out += bytes(int(v) for v in ch.b_values)
    return bytes(out)


def decode_session_frame(frame: bytes, seed_mode: str = "counter128") -> tuple[CompactChallenge, int | None]:
    if seed_mode == "counter128":
        seed, check = frame[:SEED_BYTES_COUNTER_MODE], frame[SEED_BYTES_COUNTER_MODE]
        rest = frame[SEED_BYTES_COUNTER_MODE + 1 :]
    else:
        seed, check = frame[:32], None
        rest = frame[32:]
    t = int.from_bytes(rest[:2], "little")
    b = np.frombuffer(rest[2 : 2 + t], dtype=np.uint8).astype(np.int64)
    if b.size != t:
        raise ValueError("session frame truncated")
    return CompactChallenge(bytes(seed), b), check


def challenge_payload_bits(t: int, seed_mode: str) -> int:
    """Challenge content of a t-bit session, excluding the length framing.

    seed256: 256 + 8t (the published accounting). counter128: 128 + 8 + 8t,
    the 8 being the counter-check byte.
    """
    if seed_mode == "seed256":
        return 256 + 8 * t
    if seed_mode == "counter128":
        return 128 + 8 + 8 * t
    raise ValueError(f"unknown seed mode {seed_mode!r}")
