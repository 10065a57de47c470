"""GF(2^8) arithmetic tables for the BCH layer.

Field fixed by the primitive polynomial x^8+x^4+x^3+x^2+1 (0x11D) with
generator alpha = 2; both are part of the helper-data format.
"""

from __future__ import annotations

import numpy as np

PRIM_POLY = 0x11D
ORDER = 255

# EXP is oversized and zero-padded so that EXP[LOG[a] + LOG[b]] multiplies
# with automatic zero handling: LOG[0] is a sentinel pushing sums past 510.
_ZERO_LOG = 512

EXP = np.zeros(2 * _ZERO_LOG + 1, dtype=np.int64)
LOG = np.full(256, _ZERO_LOG, dtype=np.int64)
_x = 1
for _i in range(ORDER):
    EXP[_i] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 0x100:
        _x ^= PRIM_POLY
if _x != 1:
    raise AssertionError("alpha=2 is not primitive for 0x11D")
EXP[ORDER : 2 * ORDER] = EXP[:ORDER]


def mul(a, b):
    """Field product; works elementwise on arrays."""
    return EXP[LOG[a] + LOG[b]]


def inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^8)")
    return int(EXP[ORDER - LOG[a]])


def alpha_pow(e: int) -> int:
    """alpha^e for any integer exponent."""
    return int(EXP[e % ORDER])


def poly_mul(p: list[int], q: list[int]) -> list[int]:
    """Product of polynomials over GF(2^8), coefficients low-to-high."""
    out = [0] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        if pi == 0:
            continue
        for j, qj in enumerate(q):
            out[i + j] ^= int(mul(pi, qj))
    return out


def poly_eval(p: list[int], x: int) -> int:
    """Horner evaluation over GF(2^8)."""
    acc = 0
    for c in reversed(p):
        acc = int(mul(acc, x)) ^ c
    return acc
