"""Shortened binary BCH codes of parent length 255: systematic encode, bounded-distance decode.

Decoding is syndromes -> Berlekamp-Massey -> Chien search. Two paths share
the algorithm: a scalar one, written for readability, and a batched one for
the Monte Carlo harnesses; tests pin them to each other. Like any
bounded-distance decoder, patterns beyond t errors either raise
DecodeFailure or miscorrect to a wrong codeword.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import gf256
from .gf256 import EXP, LOG, ORDER

PARENT_N = 255


class DecodeFailure(Exception):
    """Error locator inconsistent with a correctable pattern."""


def _cyclotomic_coset(i: int) -> frozenset[int]:
    c, out = i, set()
    while c not in out:
        out.add(c)
        c = (2 * c) % ORDER
    return frozenset(out)


def _generator_poly(t: int) -> list[int]:
    """g(x) = lcm of minimal polynomials of alpha^1 .. alpha^2t (binary coefficients)."""
    covered: set[int] = set()
    g = [1]
    for i in range(1, 2 * t + 1):
        if i in covered:
            continue
        coset = _cyclotomic_coset(i)
        covered |= coset
        minimal = [1]
        for e in coset:
            minimal = gf256.poly_mul(minimal, [gf256.alpha_pow(e), 1])
        if any(c not in (0, 1) for c in minimal):
            raise AssertionError("minimal polynomial not binary")
        g = gf256.poly_mul(g, minimal)
    return g


@dataclass(frozen=True)
class BchCode:
    """Parent (255, k) code correcting t errors, shortened by `shorten` high positions."""

    t: int
    shorten: int = 0

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if not 0 <= self.shorten < self.k_parent:
            raise ValueError("shorten out of range")

    @property
    def generator(self) -> np.ndarray:
        return _code_tables(self.t)[0]

    @property
    def parity_bits(self) -> int:
        return int(_code_tables(self.t)[0].size - 1)

    @property
    def k_parent(self) -> int:
        return PARENT_N - self.parity_bits

    @property
    def n_s(self) -> int:
        return PARENT_N - self.shorten

    @property
    def k_s(self) -> int:
        return self.k_parent - self.shorten

    def __str__(self):
        return f"[{self.n_s}, {self.k_s}, {self.t}] (parent [255, {self.k_parent}])"


@lru_cache(maxsize=None)
def _code_tables(t: int):
    """(generator coeffs, parity matrix P, syndrome bit matrix M) for the parent code.

    P[i, j]: parity bit j of x^(parity+i) mod g -- systematic encoding is a
    GF(2) matmul. M[i, u]: bit u%8 of alpha^((u//8+1)*i) -- syndromes of a
    received word are GF(2)-linear, so they come from one matmul too.
    """
    g = np.array(_generator_poly(t), dtype=np.uint8)
    p = g.size - 1
    k = PARENT_N - p
    P = np.zeros((k, p), dtype=np.uint8)
    cur = g[:p].copy()  # g monic, so x^p mod g is the tail of g; iterate *x mod g
    for i in range(k):
        P[i] = cur
        # multiply by x mod g
        carry = cur[-1]
        cur = np.roll(cur, 1)
        cur[0] = 0
        if carry:
            cur ^= g[:p]
    n_syn = 2 * t
    idx = np.arange(PARENT_N, dtype=np.int64)
    M = np.zeros((PARENT_N, 8 * n_syn), dtype=np.uint8)
    for j in range(1, n_syn + 1):
        vals = EXP[(j * idx) % ORDER]
        for u in range(8):
            M[:, (j - 1) * 8 + u] = (vals >> u) & 1
    return g, P, M


def encode(msg: np.ndarray, code: BchCode) -> np.ndarray:
    """Systematic codeword: parity in positions [0, parity), message above it."""
    out = encode_batch(np.asarray(msg, dtype=np.uint8)[None, :], code)
    return out[0]


def encode_batch(msgs: np.ndarray, code: BchCode) -> np.ndarray:
    msgs = np.asarray(msgs, dtype=np.uint8)
    if msgs.ndim != 2 or msgs.shape[1] != code.k_s:
        raise ValueError(f"messages must be (B, {code.k_s})")
    _, P, _ = _code_tables(code.t)
    parity = (msgs.astype(np.float32) @ P[: code.k_s].astype(np.float32)) % 2
    out = np.empty((msgs.shape[0], code.n_s), dtype=np.uint8)
    out[:, : code.parity_bits] = parity.astype(np.uint8)
    out[:, code.parity_bits :] = msgs
    return out


def _syndromes(received: np.ndarray, code: BchCode) -> list[int]:
    """S_j = r(alpha^j) for j = 1..2t."""
    positions = np.flatnonzero(received)
    syn = []
    for j in range(1, 2 * code.t + 1):
        s = 0
        for i in positions:
            s ^= int(EXP[(j * int(i)) % ORDER])
        syn.append(s)
    return syn


def _berlekamp_massey(syn: list[int], t: int) -> tuple[list[int], int]:
    """Error locator polynomial (low-to-high coefficients) and its design length L."""
    C, B = [1], [1]
    L, m, b = 0, 1, 1
    for n in range(2 * t):
        d = syn[n]
        for i in range(1, L + 1):
            if i < len(C):
                d ^= int(gf256.mul(C[i], syn[n - i]))
        if d == 0:
            m += 1
            continue
        T = C.copy()
        coef = gf256.mul(d, gf256.inv(b))
        shift = [0] * m + [int(gf256.mul(coef, c)) for c in B]
        if len(shift) > len(C):
            C = C + [0] * (len(shift) - len(C))
        for i, v in enumerate(shift):
            C[i] ^= v
        if 2 * L <= n:
            L = n + 1 - L
            B = T
            b = d
            m = 1
        else:
            m += 1
    return C, L


def _chien(locator: list[int], n_valid: int) -> list[int] | None:
    """Error positions i (< PARENT_N) with locator(alpha^-i) = 0, or None if any root is invalid."""
    deg = max((i for i, c in enumerate(locator) if c), default=0)
    positions = []
    for i in range(PARENT_N):
        if gf256.poly_eval(locator, gf256.alpha_pow(-i)) == 0:
            if i >= n_valid:
                return None
            positions.append(i)
    if len(positions) != deg:
        return None
    return positions


def decode(received: np.ndarray, code: BchCode) -> tuple[np.ndarray, int]:
    """Correct up to t errors; returns (message, corrected count) or raises DecodeFailure."""
    received = np.asarray(received, dtype=np.uint8)
    if received.shape != (code.n_s,):
        raise ValueError(f"received word must be {code.n_s} bits")
    syn = _syndromes(received, code)
    if not any(syn):
        return received[code.parity_bits :].copy(), 0
    locator, L = _berlekamp_massey(syn, code.t)
    if L > code.t:
        raise DecodeFailure(f"locator degree {L} exceeds t={code.t}")
    positions = _chien(locator, code.n_s)
    if positions is None or len(positions) != L:
        raise DecodeFailure("error locator roots inconsistent")
    fixed = received.copy()
    fixed[positions] ^= 1
    return fixed[code.parity_bits :].copy(), len(positions)


def syndromes_batch(received: np.ndarray, code: BchCode) -> np.ndarray:
    """(B, 2t) syndrome bytes for a batch of received words."""
    received = np.asarray(received, dtype=np.uint8)
    _, _, M = _code_tables(code.t)
    Mv = M[: code.n_s].astype(np.float32)
    bits = (received.astype(np.float32) @ Mv) % 2
    bits = bits.astype(np.int64).reshape(received.shape[0], 2 * code.t, 8)
    weights = 1 << np.arange(8, dtype=np.int64)
    return bits @ weights


def _bm_batch(syn: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Inversionless Berlekamp-Massey over a batch; returns (locators (B, t+2), L (B,))."""
    Bn = syn.shape[0]
    width = t + 2
    C = np.zeros((Bn, width), dtype=np.int64)
    Bp = np.zeros((Bn, width), dtype=np.int64)
    C[:, 0] = 1
    Bp[:, 0] = 1
    L = np.zeros(Bn, dtype=np.int64)
    gamma = np.ones(Bn, dtype=np.int64)
    for n in range(2 * t):
        # discrepancy d = sum_i C_i * S_{n-i}
        d = np.zeros(Bn, dtype=np.int64)
        for i in range(min(n, width - 1) + 1):
            d ^= EXP[LOG[C[:, i]] + LOG[syn[:, n - i]]]
        # C_new = gamma*C - d*x*B
        xB = np.zeros_like(Bp)
        xB[:, 1:] = Bp[:, :-1]
        Cn = EXP[LOG[C] + LOG[gamma][:, None]] ^ EXP[LOG[xB] + LOG[d][:, None]]
        upd = (d != 0) & (2 * L <= n)
        Bp = np.where(upd[:, None], C, xB)
        gamma = np.where(upd, d, gamma)
        L = np.where(upd, n + 1 - L, L)
        C = Cn
    return C, L


def decode_batch(received: np.ndarray, code: BchCode) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched bounded-distance decode.

    Returns (messages (B, k_s), corrected counts (B,), ok (B,) bool); rows
    with ok=False hold unusable messages. Chien work is bucketed by locator
    degree (single errors resolve in closed form) since low-weight patterns
    dominate every realistic channel.
    """
    received = np.asarray(received, dtype=np.uint8)
    if received.ndim != 2 or received.shape[1] != code.n_s:
        raise ValueError(f"received words must be (B, {code.n_s})")
    Bn = received.shape[0]
    syn = syndromes_batch(received, code)
    dirty = syn.any(axis=1)
    ok = np.ones(Bn, dtype=bool)
    n_corr = np.zeros(Bn, dtype=np.int64)
    fixed = received.copy()
    if dirty.any():
        sub = np.flatnonzero(dirty)
        C, L = _bm_batch(syn[sub], code.t)
        ok_sub = L <= code.t
        roots = np.zeros((sub.size, code.n_s), dtype=bool)
        i_idx = np.arange(code.n_s, dtype=np.int64)
        for lv in np.unique(L[ok_sub]):
            rows = np.flatnonzero((L == lv) & ok_sub)
            if lv == 0:
                # nonzero syndrome with an empty locator can't be consistent
                ok_sub[rows] = False
            elif lv == 1:
                # C0 + C1*alpha^-i = 0  =>  i = log(C1) - log(C0)
                c0, c1 = C[rows, 0], C[rows, 1]
                live = c1 != 0  # c0 is a nonzero scale of 1 by construction
                pos = (LOG[c1] - LOG[c0]) % ORDER
                good = live & (pos < code.n_s)
                roots[rows[good], pos[good]] = True
                ok_sub[rows[~good]] = False
            else:
                # Chien over the transmitted positions only: roots in the
                # shortened (virtual) region surface as a count shortfall
                val = np.zeros((rows.size, code.n_s), dtype=np.int64)
                for u in range(int(lv) + 1):
                    pw = EXP[(-u * i_idx) % ORDER]
                    val ^= EXP[LOG[C[rows, u]][:, None] + LOG[pw][None, :]]
                sub_roots = val == 0
                good = sub_roots.sum(axis=1) == lv
                roots[rows[good]] = sub_roots[good]
                ok_sub[rows[~good]] = False
        fixed[sub] ^= (roots & ok_sub[:, None]).astype(np.uint8)
        ok[sub] = ok_sub
        n_corr[sub] = np.where(ok_sub, roots.sum(axis=1), 0)
    return fixed[:, code.parity_bits :].copy(), n_corr, ok
