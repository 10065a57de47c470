"""Active secret-extraction attack on the raw decryption oracle, and why the counter stops it.

The attack holds a fixed and sweeps b across Z_q; the response edge pins
<a, s> exactly, and n independent rows feed a linear solve over Z_{2^k}.
Against the sessioned device there is no caller-chosen a -- the oracle
interface itself refuses, which is the countermeasure's entire content.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import Device
from .lwe import LweParams, quantize


class Unsolvable(Exception):
    """Rank-deficient system over Z_{2^k} with no spare equations left."""


@dataclass
class AttackResult:
    status: str  # "recovered" | "blocked"
    secret: np.ndarray | None
    queries: int
    rows_used: int

    @property
    def blocked(self) -> bool:
        return self.status == "blocked"


class RawDecryptOracle:
    """Chosen-ciphertext decryption oracle: the vulnerable surface the counter removes."""

    can_choose_a = True

    def __init__(self, decrypt_fn, params: LweParams):
        self._decrypt = decrypt_fn
        self.params = params
        self.queries = 0

    @classmethod
    def from_device(cls, dev: Device) -> "RawDecryptOracle":
        # raises PermissionError unless the device was built with the unsafe flag
        dev.raw_decrypt(np.zeros(dev.params.n, dtype=np.int64), 0)
        return cls(dev.raw_decrypt, dev.params)

    @classmethod
    def from_secret(cls, s: np.ndarray, params: LweParams) -> "RawDecryptOracle":
        s = np.asarray(s, dtype=np.int64)

        def fn(a, b):
            return quantize(int(b - a @ s) % params.q, params.q)

        return cls(fn, params)

    def query(self, a: np.ndarray, b: int) -> int:
        self.queries += 1
        return self._decrypt(a, b)


class SessionOracle:
    """The defended device surface: seed and b values only, counter mixed in by the device."""

    can_choose_a = False

    def __init__(self, dev: Device):
        self.device = dev
        self.params = dev.params
        self.queries = 0

    def respond(self, challenge) -> np.ndarray:
        self.queries += challenge.t
        resp, _ = self.device.respond(challenge)
        return resp


def find_threshold_b(oracle: RawDecryptOracle, a: np.ndarray) -> int:
    """Smallest b (wrap-aware) where the response flips 0 -> 1; costs exactly q queries."""
    q = oracle.params.q
    responses = [oracle.query(a, b) for b in range(q)]
    for b in range(q):
        if responses[b] == 1 and responses[(b - 1) % q] == 0:
            return b
    raise RuntimeError("no 0->1 edge found; oracle is not a quantized decryption")


def recover_dot(oracle: RawDecryptOracle, a: np.ndarray) -> int:
    """<a, s> from the sweep edge: the first 1-response sits at <a,s> + q/4 + 1."""
    q = oracle.params.q
    b_hat = find_threshold_b(oracle, a)
    return (b_hat - q // 4 - 1) % q


def solve_linear_mod_2k(
    rows: list[tuple[np.ndarray, int]],
    q: int,
    more_rows=None,
) -> np.ndarray:
    """Gaussian elimination over Z_{2^k} with odd (invertible) pivots.

    When a column offers no odd pivot the solver asks more_rows() for
    additional equations rather than building Smith-form machinery; without
    a supplier it raises Unsolvable.
    """
    if not rows:
        raise Unsolvable("no equations")
    n = rows[0][0].size
    M = np.array([np.append(np.asarray(a, dtype=np.int64) % q, y % q) for a, y in rows])
    orig = M.copy()
    rank = 0
    for col in range(n):
        while True:
            pivots = np.flatnonzero(M[rank:, col] % 2 == 1)
            if pivots.size:
                break
            if more_rows is None:
                raise Unsolvable(f"no odd pivot in column {col}")
            extra = more_rows()
            if not extra:
                raise Unsolvable(f"no odd pivot in column {col} and supplier exhausted")
            fresh = np.array(
                [np.append(np.asarray(a, dtype=np.int64) % q, y % q) for a, y in extra]
            )
            orig = np.vstack([orig, fresh])
            # reduce the new rows against the pivots already placed
            for c in range(rank):
                fresh = (fresh - np.outer(fresh[:, c], M[c])) % q
            M = np.vstack([M, fresh])
        r = rank + pivots[0]
        M[[rank, r]] = M[[r, rank]]
        inv = pow(int(M[rank, col]), -1, q)
        M[rank] = (M[rank] * inv) % q
        others = np.flatnonzero(M[:, col] % q != 0)
        others = others[others != rank]
        M[others] = (M[others] - np.outer(M[others, col], M[rank])) % q
        rank += 1
    s = M[:n, n] % q
    if np.any((orig[:, :n] @ s - orig[:, n]) % q != 0):
        raise Unsolvable("solution fails substitution check")
    return s


def active_attack(
    oracle,
    params: LweParams,
    rng: np.random.Generator,
    query_budget: int | None = None,
) -> AttackResult:
    """Recover s through a raw oracle, or report blocked against the sessioned surface.

    The nominal procedure costs n*q queries; the default budget allows 25%
    slack for extra rows where elimination hits even pivots (with a floor of
    24 spare rows so small-n runs do not starve).
    """
    if not getattr(oracle, "can_choose_a", False):
        return AttackResult("blocked", None, 0, 0)
    n, q = params.n, params.q
    if query_budget is None:
        query_budget = max(int(1.25 * n), n + 24) * q
    rows: list[tuple[np.ndarray, int]] = []

    def collect(count: int) -> list[tuple[np.ndarray, int]]:
        fresh = []
        for _ in range(count):
            if oracle.queries + q > query_budget:
                break
            a = rng.integers(0, q, size=n, dtype=np.int64)
            row = (a, recover_dot(oracle, a))
            fresh.append(row)
            rows.append(row)
        return fresh

    collect(n)
    if len(rows) < n:
        raise Unsolvable("query budget too small for n rows")
    s = solve_linear_mod_2k(rows, q, more_rows=lambda: collect(1))
    return AttackResult("recovered", s, oracle.queries, len(rows))
