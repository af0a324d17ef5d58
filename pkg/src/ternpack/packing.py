"""Bit-exact packed weight formats: I2_S (2b/weight), TL1 (4b/pair), TL2 (5b/triple).

Layout conventions (fixed so blobs are byte-identical across implementations):
  - little-endian within a byte: lower-numbered weight in lower-order bits
  - every row starts at a byte boundary (and sign-byte boundary for TL2)
  - columns are zero-padded to the format's group multiple (4 / 2 / 6)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TernaryMatrix, _freeze

__all__ = [
    "PackedI2S",
    "PackedTL1",
    "PackedTL2",
    "encode_i2s",
    "decode_i2s",
    "encode_tl1",
    "decode_tl1",
    "encode_tl2",
    "decode_tl2",
    "tl1_index",
    "tl2_code",
    "i2s_payload_bytes",
    "tl1_payload_bytes",
    "tl2_payload_bytes",
]

# Filler nibble for the unused high half of a trailing TL1 byte: the (0, 0) pair.
TL1_ZERO_INDEX = 4


def _pad_up(n: int, m: int) -> int:
    return -(-n // m) * m


def i2s_payload_bytes(rows: int, cols: int) -> int:
    return rows * (_pad_up(cols, 4) // 4)


def tl1_payload_bytes(rows: int, cols: int) -> int:
    return rows * -(-(_pad_up(cols, 2) // 2) // 2)


def tl2_payload_bytes(rows: int, cols: int) -> tuple[int, int]:
    """(index plane bytes, sign plane bytes)."""
    pc = _pad_up(cols, 6)
    return rows * (pc // 6), rows * -(-(pc // 3) // 8)


def tl1_index(w0: int, w1: int) -> int:
    """Map a ternary weight pair to its 4-bit code: lexicographic with -1 < 0 < 1."""
    if w0 not in (-1, 0, 1) or w1 not in (-1, 0, 1):
        raise ValueError("weights must be ternary")
    return 3 * (w0 + 1) + (w1 + 1)


def tl2_code(w0: int, w1: int, w2: int) -> tuple[int, int]:
    """Map a ternary weight triple to (sign bit, 4-bit index).

    The 27 triples are enumerated base-3 and centered: d = 9(w0+1) + 3(w1+1)
    + (w2+1) - 13 in [-13, 13]; sign = (d < 0), index = |d|. Negating a triple
    flips the sign and keeps the index; the all-zero triple is (0, 0).
    """
    for w in (w0, w1, w2):
        if w not in (-1, 0, 1):
            raise ValueError("weights must be ternary")
    d = 9 * (w0 + 1) + 3 * (w1 + 1) + (w2 + 1) - 13
    return (1 if d < 0 else 0, abs(d))


@dataclass(frozen=True)
class PackedI2S:
    """2-bit codes (w + 1), four weights per byte; code 0b11 is reserved."""

    rows: int
    cols: int
    padded_cols: int
    data: np.ndarray  # uint8, shape (rows, padded_cols // 4)
    scale: float
    trusted: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        if self.padded_cols != _pad_up(self.cols, 4):
            raise ValueError("padded_cols must be cols rounded up to a multiple of 4")
        d = np.asarray(self.data, dtype=np.uint8).reshape(self.rows, self.padded_cols // 4)
        object.__setattr__(self, "data", _freeze(d))

    @property
    def bytes_per_row(self) -> int:
        return self.padded_cols // 4

    def validate(self) -> None:
        b = self.data
        bad = (b & 3) == 3
        bad |= ((b >> 2) & 3) == 3
        bad |= ((b >> 4) & 3) == 3
        bad |= (b >> 6) == 3
        if np.any(bad):
            row = int(np.argwhere(bad)[0][0])
            raise ValueError(f"invalid I2_S code at row {row}")
        object.__setattr__(self, "trusted", True)


@dataclass(frozen=True)
class PackedTL1:
    """4-bit pair indices in [0, 8], two per byte."""

    rows: int
    cols: int
    padded_cols: int
    data: np.ndarray  # uint8, shape (rows, ceil(padded_cols/2 / 2))
    scale: float
    trusted: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        if self.padded_cols != _pad_up(self.cols, 2):
            raise ValueError("padded_cols must be cols rounded up to a multiple of 2")
        d = np.asarray(self.data, dtype=np.uint8).reshape(self.rows, self.bytes_per_row)
        object.__setattr__(self, "data", _freeze(d))

    @property
    def groups(self) -> int:
        return self.padded_cols // 2

    @property
    def bytes_per_row(self) -> int:
        return -(-self.groups // 2)

    def validate(self) -> None:
        b = self.data
        bad = ((b & 15) > 8) | ((b >> 4) > 8)
        if np.any(bad):
            row = int(np.argwhere(bad)[0][0])
            raise ValueError(f"invalid TL1 index at row {row}")
        object.__setattr__(self, "trusted", True)


@dataclass(frozen=True)
class PackedTL2:
    """Per triple: one 4-bit index in [0, 13] plus one sign bit, in separate planes."""

    rows: int
    cols: int
    padded_cols: int
    index_data: np.ndarray  # uint8, shape (rows, padded_cols // 6)
    sign_data: np.ndarray  # uint8, shape (rows, ceil(padded_cols/3 / 8))
    scale: float
    trusted: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        if self.padded_cols != _pad_up(self.cols, 6):
            raise ValueError("padded_cols must be cols rounded up to a multiple of 6")
        idx = np.asarray(self.index_data, dtype=np.uint8).reshape(self.rows, self.index_bytes_per_row)
        sgn = np.asarray(self.sign_data, dtype=np.uint8).reshape(self.rows, self.sign_bytes_per_row)
        object.__setattr__(self, "index_data", _freeze(idx))
        object.__setattr__(self, "sign_data", _freeze(sgn))

    @property
    def groups(self) -> int:
        return self.padded_cols // 3

    @property
    def index_bytes_per_row(self) -> int:
        return self.padded_cols // 6

    @property
    def sign_bytes_per_row(self) -> int:
        return -(-self.groups // 8)

    def validate(self) -> None:
        idx = self.data_nibbles()
        bad = idx > 13
        if np.any(bad):
            row = int(np.argwhere(bad)[0][0])
            raise ValueError(f"invalid TL2 index at row {row}")
        noncanon = (self.data_signs() == 1) & (idx == 0)
        if np.any(noncanon):
            row = int(np.argwhere(noncanon)[0][0])
            raise ValueError(f"non-canonical zero at row {row}")
        object.__setattr__(self, "trusted", True)

    def data_nibbles(self) -> np.ndarray:
        b = self.index_data
        out = np.empty((self.rows, self.groups), dtype=np.uint8)
        out[:, 0::2] = b & 15
        out[:, 1::2] = b >> 4
        return out

    def data_signs(self) -> np.ndarray:
        bits = np.unpackbits(self.sign_data, axis=1, bitorder="little")
        return bits[:, : self.groups]


def encode_i2s(m: TernaryMatrix) -> PackedI2S:
    pc = _pad_up(m.cols, 4)
    codes = np.ones((m.rows, pc), dtype=np.uint8)  # padding encodes 0 -> code 01
    codes[:, : m.cols] = (m.values + 1).astype(np.uint8)
    b = codes[:, 0::4] | (codes[:, 1::4] << 2) | (codes[:, 2::4] << 4) | (codes[:, 3::4] << 6)
    return PackedI2S(rows=m.rows, cols=m.cols, padded_cols=pc, data=b, scale=m.scale,
                     trusted=True)


def decode_i2s(p: PackedI2S) -> TernaryMatrix:
    b = p.data
    codes = np.empty((p.rows, p.padded_cols), dtype=np.uint8)
    codes[:, 0::4] = b & 3
    codes[:, 1::4] = (b >> 2) & 3
    codes[:, 2::4] = (b >> 4) & 3
    codes[:, 3::4] = b >> 6
    if np.any(codes == 3):
        raise ValueError("invalid I2_S code")
    values = codes[:, : p.cols].astype(np.int8) - 1
    return TernaryMatrix(rows=p.rows, cols=p.cols, values=values, scale=p.scale)


def encode_tl1(m: TernaryMatrix) -> PackedTL1:
    pc = _pad_up(m.cols, 2)
    w = np.zeros((m.rows, pc), dtype=np.int16)  # padding pairs are (0, 0)
    w[:, : m.cols] = m.values
    idx = (3 * (w[:, 0::2] + 1) + (w[:, 1::2] + 1)).astype(np.uint8)
    groups = pc // 2
    if groups % 2:
        idx = np.concatenate(
            [idx, np.full((m.rows, 1), TL1_ZERO_INDEX, dtype=np.uint8)], axis=1)
    b = idx[:, 0::2] | (idx[:, 1::2] << 4)
    return PackedTL1(rows=m.rows, cols=m.cols, padded_cols=pc, data=b, scale=m.scale,
                     trusted=True)


def decode_tl1(p: PackedTL1) -> TernaryMatrix:
    b = p.data
    nib = np.empty((p.rows, 2 * b.shape[1]), dtype=np.uint8)
    nib[:, 0::2] = b & 15
    nib[:, 1::2] = b >> 4
    if np.any(nib > 8):
        raise ValueError("invalid TL1 index")
    nib = nib[:, : p.groups].astype(np.int8)
    values = np.empty((p.rows, p.padded_cols), dtype=np.int8)
    values[:, 0::2] = nib // 3 - 1
    values[:, 1::2] = nib % 3 - 1
    return TernaryMatrix(rows=p.rows, cols=p.cols, values=values[:, : p.cols], scale=p.scale)


def encode_tl2(m: TernaryMatrix) -> PackedTL2:
    pc = _pad_up(m.cols, 6)
    w = np.zeros((m.rows, pc), dtype=np.int16)  # padding triples are (0, 0, 0)
    w[:, : m.cols] = m.values
    d = 9 * (w[:, 0::3] + 1) + 3 * (w[:, 1::3] + 1) + (w[:, 2::3] + 1) - 13
    signs = (d < 0).astype(np.uint8)
    idx = np.abs(d).astype(np.uint8)
    # padded_cols is a multiple of 6, so the nibble count per row is even
    index_data = idx[:, 0::2] | (idx[:, 1::2] << 4)
    sign_data = np.packbits(signs, axis=1, bitorder="little")
    return PackedTL2(rows=m.rows, cols=m.cols, padded_cols=pc,
                     index_data=index_data, sign_data=sign_data, scale=m.scale,
                     trusted=True)


def decode_tl2(p: PackedTL2) -> TernaryMatrix:
    idx = p.data_nibbles()
    if np.any(idx > 13):
        raise ValueError("invalid TL2 index")
    signs = p.data_signs()
    if np.any((signs == 1) & (idx == 0)):
        raise ValueError("non-canonical zero")
    d = idx.astype(np.int16) * (1 - 2 * signs.astype(np.int16)) + 13
    values = np.empty((p.rows, p.padded_cols), dtype=np.int8)
    values[:, 0::3] = (d // 9) - 1
    values[:, 1::3] = (d // 3) % 3 - 1
    values[:, 2::3] = d % 3 - 1
    return TernaryMatrix(rows=p.rows, cols=p.cols, values=values[:, : p.cols], scale=p.scale)
