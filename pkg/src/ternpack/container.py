"""TPK1: a minimal self-describing container for packed ternary models.

Layout (all multi-octet integers little-endian):

    magic    4 bytes  "TPK1"
    version  u16      1
    format   u8       1 = I2_S, 2 = TL1, 3 = TL2
    count    u32      number of matrices
    per matrix:
        name_len u16, name bytes (utf-8)
        rows u32, cols u32
        scale f32
        payload_len u32 (TL2: two lengths, indices then signs)
        payload bytes (TL2: index plane then sign plane)

Payload lengths must match the packing module's size formulas exactly.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .packing import (
    PackedI2S,
    PackedTL1,
    PackedTL2,
    i2s_payload_bytes,
    tl1_payload_bytes,
    tl2_payload_bytes,
)

__all__ = ["TpkError", "write_model", "read_model", "FORMAT_CODES", "FORMAT_NAMES",
           "BITS_PER_WEIGHT"]

MAGIC = b"TPK1"
VERSION = 1

FORMAT_CODES = {"i2s": 1, "tl1": 2, "tl2": 3}
FORMAT_NAMES = {v: k for k, v in FORMAT_CODES.items()}
BITS_PER_WEIGHT = {"i2s": 2.0, "tl1": 2.0, "tl2": 5.0 / 3.0}


class TpkError(Exception):
    """Corrupt or malformed TPK1 file; ``offset`` is the first offending byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


def _format_of(p) -> str:
    if isinstance(p, PackedI2S):
        return "i2s"
    if isinstance(p, PackedTL1):
        return "tl1"
    if isinstance(p, PackedTL2):
        return "tl2"
    raise TypeError(f"not a packed matrix: {type(p).__name__}")


def write_model(path, matrices: list[tuple[str, object]]) -> None:
    """Write named packed matrices, all of one format, to ``path``."""
    if not matrices:
        raise ValueError("no matrices to write")
    fmt = _format_of(matrices[0][1])
    out = bytearray()
    out += MAGIC
    out += struct.pack("<HBI", VERSION, FORMAT_CODES[fmt], len(matrices))
    for name, p in matrices:
        if _format_of(p) != fmt:
            raise ValueError("all matrices in one file must share a format")
        nb = name.encode("utf-8")
        out += struct.pack("<H", len(nb)) + nb
        out += struct.pack("<IIf", p.rows, p.cols, p.scale)
        if fmt == "tl2":
            idx = p.index_data.tobytes()
            sgn = p.sign_data.tobytes()
            out += struct.pack("<II", len(idx), len(sgn)) + idx + sgn
        else:
            payload = p.data.tobytes()
            out += struct.pack("<I", len(payload)) + payload
    Path(path).write_bytes(bytes(out))


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.blob):
            raise TpkError(f"truncated file while reading {what}", self.pos)
        b = self.blob[self.pos: self.pos + n]
        self.pos += n
        return b

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def read_model(path) -> tuple[str, list[tuple[str, object]]]:
    """Read a TPK1 file; returns (format name, [(name, packed matrix), ...]).

    Returned matrices are structurally sound but not content-validated; call
    ``validate()`` (the kernels do) to check code ranges.
    """
    r = _Reader(Path(path).read_bytes())
    if r.take(4, "magic") != MAGIC:
        raise TpkError("bad magic", 0)
    (version,) = r.unpack("<H", "version")
    if version != VERSION:
        raise TpkError(f"unsupported version {version}", r.pos - 2)
    (code,) = r.unpack("<B", "format")
    if code not in FORMAT_NAMES:
        raise TpkError(f"unknown format code {code}", r.pos - 1)
    fmt = FORMAT_NAMES[code]
    (count,) = r.unpack("<I", "matrix count")
    matrices = []
    for i in range(count):
        (name_len,) = r.unpack("<H", f"matrix {i} name length")
        name = r.take(name_len, f"matrix {i} name").decode("utf-8")
        dims_at = r.pos
        rows, cols, scale = r.unpack("<IIf", f"matrix {i} header")
        if rows < 1 or cols < 1:
            raise TpkError(f"matrix {i} has empty dimensions", dims_at)
        if not (scale > 0 and np.isfinite(scale)):
            raise TpkError(f"matrix {i} has invalid scale", dims_at + 8)
        if fmt == "tl2":
            lens_at = r.pos
            idx_len, sgn_len = r.unpack("<II", f"matrix {i} payload lengths")
            want_idx, want_sgn = tl2_payload_bytes(rows, cols)
            if idx_len != want_idx or sgn_len != want_sgn:
                raise TpkError(f"matrix {i} payload length mismatch", lens_at)
            idx = np.frombuffer(r.take(idx_len, f"matrix {i} index payload"),
                                dtype=np.uint8)
            sgn = np.frombuffer(r.take(sgn_len, f"matrix {i} sign payload"),
                                dtype=np.uint8)
            p = PackedTL2(rows=rows, cols=cols, padded_cols=-(-cols // 6) * 6,
                          index_data=idx, sign_data=sgn, scale=scale)
        else:
            lens_at = r.pos
            (plen,) = r.unpack("<I", f"matrix {i} payload length")
            want = (i2s_payload_bytes(rows, cols) if fmt == "i2s"
                    else tl1_payload_bytes(rows, cols))
            if plen != want:
                raise TpkError(f"matrix {i} payload length mismatch", lens_at)
            data = np.frombuffer(r.take(plen, f"matrix {i} payload"), dtype=np.uint8)
            if fmt == "i2s":
                p = PackedI2S(rows=rows, cols=cols, padded_cols=-(-cols // 4) * 4,
                              data=data, scale=scale)
            else:
                p = PackedTL1(rows=rows, cols=cols, padded_cols=-(-cols // 2) * 2,
                              data=data, scale=scale)
        matrices.append((name, p))
    if r.pos != len(r.blob):
        raise TpkError("trailing bytes after last matrix", r.pos)
    return fmt, matrices
