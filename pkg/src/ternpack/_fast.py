"""Numba inner loops for the packed GEMV kernels.

The packed formats put 2 groups in every byte (2 pair-nibbles for TL1, 2
triple-nibbles for TL2, 2 weight-pair "nibbles" for I2_S), so the hot loop is
one table lookup per byte: table[j] holds the combined partial sum for every
possible byte value at byte column j. Tables are int32 to keep the gather on
the fast path; the int16-LUT semantics are enforced separately by the checked
kernels in :mod:`ternpack.kernels`.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "byte_gemv",
    "tl2_byte_gemv",
    "i2s_nibble_table",
    "combine_nibble_planes",
    "tl2_signed_table",
]


@njit(cache=True, nogil=True)
def byte_gemv(packed, table, out):
    """out[i] = sum_j table[j, packed[i, j]] for I2_S and TL1 byte streams."""
    rows, bc = packed.shape
    i = 0
    while i + 4 <= rows:
        a0 = np.int32(0)
        a1 = np.int32(0)
        a2 = np.int32(0)
        a3 = np.int32(0)
        for j in range(bc):
            t = table[j]
            a0 += t[packed[i, j]]
            a1 += t[packed[i + 1, j]]
            a2 += t[packed[i + 2, j]]
            a3 += t[packed[i + 3, j]]
        out[i] = a0
        out[i + 1] = a1
        out[i + 2] = a2
        out[i + 3] = a3
        i += 4
    while i < rows:
        acc = np.int32(0)
        for j in range(bc):
            acc += table[j, packed[i, j]]
        out[i] = acc
        i += 1


@njit(cache=True, nogil=True)
def tl2_byte_gemv(idx_bytes, sign_bytes, table, out):
    """TL2 lookup with the two triple signs folded into bits 8..9 of the index.

    Byte column j covers triples 2j (low nibble) and 2j+1 (high nibble); their
    sign bits live at positions 2j and 2j+1 of the row's sign bit-plane.
    """
    rows, bc = idx_bytes.shape
    nb4 = bc >> 2
    i = 0
    while i + 2 <= rows:
        a0 = np.int32(0)
        a1 = np.int32(0)
        for jb in range(nb4):  # one sign byte covers four index bytes
            s0 = sign_bytes[i, jb]
            s1 = sign_bytes[i + 1, jb]
            j = jb * 4
            a0 += (table[j, ((s0 & 3) << 8) | idx_bytes[i, j]]
                   + table[j + 1, (((s0 >> 2) & 3) << 8) | idx_bytes[i, j + 1]]
                   + table[j + 2, (((s0 >> 4) & 3) << 8) | idx_bytes[i, j + 2]]
                   + table[j + 3, ((s0 >> 6) << 8) | idx_bytes[i, j + 3]])
            a1 += (table[j, ((s1 & 3) << 8) | idx_bytes[i + 1, j]]
                   + table[j + 1, (((s1 >> 2) & 3) << 8) | idx_bytes[i + 1, j + 1]]
                   + table[j + 2, (((s1 >> 4) & 3) << 8) | idx_bytes[i + 1, j + 2]]
                   + table[j + 3, ((s1 >> 6) << 8) | idx_bytes[i + 1, j + 3]])
        for j in range(nb4 * 4, bc):
            shift = (j & 3) * 2
            s0 = (sign_bytes[i, j >> 2] >> shift) & 3
            s1 = (sign_bytes[i + 1, j >> 2] >> shift) & 3
            a0 += table[j, (s0 << 8) | idx_bytes[i, j]]
            a1 += table[j, (s1 << 8) | idx_bytes[i + 1, j]]
        out[i] = a0
        out[i + 1] = a1
        i += 2
    while i < rows:
        acc = np.int32(0)
        for j in range(bc):
            shift = (j & 3) * 2
            s = (sign_bytes[i, j >> 2] >> shift) & 3
            acc += table[j, (s << 8) | idx_bytes[i, j]]
        out[i] = acc
        i += 1


@njit(cache=True, nogil=True)
def i2s_nibble_table(acts):
    """Partial sums of every 2-bit-coded weight pair against activation pairs.

    acts: int32 activations of even length. Returns (len // 2, 16) int32 where
    entry [k, n] applies codes (n & 3, n >> 2) to (acts[2k], acts[2k+1]).
    """
    half = acts.shape[0] // 2
    t = np.empty((half, 16), dtype=np.int32)
    for k in range(half):
        a0 = acts[2 * k]
        a1 = acts[2 * k + 1]
        for n in range(16):
            t[k, n] = ((n & 3) - 1) * a0 + ((n >> 2) - 1) * a1
    return t


@njit(cache=True, nogil=True)
def combine_nibble_planes(lo, hi):
    """Merge per-group 16-entry tables into one 256-entry table per byte column.

    table[j, b] = lo[j, b & 15] + hi[j, b >> 4].
    """
    bc = lo.shape[0]
    t = np.empty((bc, 256), dtype=np.int32)
    for j in range(bc):
        for h in range(16):
            v = hi[j, h]
            base = h << 4
            for l in range(16):
                t[j, base | l] = v + lo[j, l]
    return t


@njit(cache=True, nogil=True)
def tl2_signed_table(lo, hi):
    """1024-entry tables: index = sign pair << 8 | nibble byte, value sign-applied."""
    bc = lo.shape[0]
    t = np.empty((bc, 1024), dtype=np.int32)
    for j in range(bc):
        for s in range(4):
            fl = np.int32(1 - 2 * (s & 1))
            fh = np.int32(1 - 2 * (s >> 1))
            base_s = s << 8
            for h in range(16):
                v = fh * hi[j, h]
                base = base_s | (h << 4)
                for l in range(16):
                    t[j, base | l] = v + fl * lo[j, l]
    return t
