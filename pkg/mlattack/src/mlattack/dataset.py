"""Reader for exported CRP dataset files, plus the learnable control fixture.

This package deliberately parses the documented file format on its own
rather than importing the PUF implementation: the attack surface is
(challenge, response) text files and nothing else. See FORMATS.md in the
repository root for the format contract.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Dataset:
    challenges: np.ndarray  # (N, n_bits) uint8 in {0,1}
    responses: np.ndarray  # (N,) uint8
    n: int
    q: int
    source: str

    @property
    def n_bits(self) -> int:
        return self.challenges.shape[1]


def load(path: str | Path) -> Dataset:
    """Parse an expanded-form dataset, verifying the manifest hash first."""
    raw = Path(path).read_bytes()
    head, _, body = raw.partition(b"\n")
    manifest = json.loads(head)
    if manifest.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported dataset version {manifest.get('version')}")
    if manifest["form"] != "expanded":
        raise ValueError("modeling attacks need expanded-form datasets (bits on disk)")
    if hashlib.sha256(body).hexdigest() != manifest["sha256"]:
        raise ValueError("manifest hash mismatch: dataset corrupted or modified")
    lines = body.decode().splitlines()
    if len(lines) != manifest["count"]:
        raise ValueError(f"expected {manifest['count']} records, found {len(lines)}")
    n_bits = (manifest["n"] + 1) * (manifest["q"].bit_length() - 1)
    challenges = np.empty((len(lines), n_bits), dtype=np.uint8)
    responses = np.empty(len(lines), dtype=np.uint8)
    for i, line in enumerate(lines):
        bits, resp = line.split("\t")
        if len(bits) != n_bits:
            raise ValueError(f"record {i}: expected {n_bits} challenge bits, got {len(bits)}")
        challenges[i] = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
        responses[i] = int(resp)
    return Dataset(challenges, responses, manifest["n"], manifest["q"], manifest["challenge_source"])


def encode_features(ds: Dataset, encoding: str) -> np.ndarray:
    """binary: one feature per challenge bit; integer: one scaled feature per Z_q value."""
    if encoding == "binary":
        return ds.challenges.astype(np.float32)
    if encoding == "integer":
        k = ds.q.bit_length() - 1
        groups = ds.challenges.reshape(ds.challenges.shape[0], -1, k).astype(np.float32)
        weights = (2.0 ** np.arange(k)).astype(np.float32)
        return (groups @ weights) / (ds.q - 1)
    raise ValueError(f"unknown encoding {encoding!r} (binary | integer)")


def write_toy_dataset(
    path: str | Path, count: int, n_bits: int = 1288, seed: int = 0
) -> None:
    """Control fixture: a linear-threshold 'PUF' in the same file format.

    Deliberately learnable; a pipeline that cannot get this one below a few
    percent error proves nothing about chance-level results elsewhere.
    """
    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 1.0, n_bits)
    bias = -w.sum() / 2  # center the threshold so labels balance
    challenges = rng.integers(0, 2, size=(count, n_bits), dtype=np.uint8)
    responses = ((challenges @ w + bias) > 0).astype(np.uint8)
    n = n_bits // 8 - 1
    lines = []
    for i in range(count):
        bits = "".join("1" if v else "0" for v in challenges[i])
        lines.append(f"{bits}\t{int(responses[i])}")
    body = "".join(line + "\n" for line in lines).encode()
    manifest = {
        "version": FORMAT_VERSION,
        "form": "expanded",
        "n": n,
        "q": 256,
        "m": 0,
        "alpha": 0.0,
        "lfsr_poly": "none",
        "challenge_source": "toy-linear-threshold",
        "count": count,
        "seed": seed,
        "sha256": hashlib.sha256(body).hexdigest(),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode() + b"\n")
        fh.write(body)
