"""GEMV kernels: integer reference oracle, fp32 reference, I2_S, TL1, TL2.

All integer kernels produce bit-identical int32 accumulators: scales are
applied once at the end, accumulation is exact, and the fast byte-table paths
are checked against the plain ``checked=True`` int16-widening paths in tests.
"""

from __future__ import annotations

import enum
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _fast
from .core import GemvResult, QuantizedActivations, TernaryMatrix, make_result
from .lut import LutTL1, LutTL2, build_lut_tl1, build_lut_tl2
from .packing import PackedI2S, PackedTL1, PackedTL2

__all__ = [
    "KernelKind",
    "WIDEN_GROUPS",
    "gemv_ref_int32",
    "gemv_f32_ref",
    "gemv_i2s",
    "gemv_tl1",
    "gemv_tl2",
    "gemv_parallel",
]

# 16-bit partial sums are folded into the 32-bit accumulator every this many
# groups; 64 * 381 = 24384 keeps even the worst TL2 case inside int16.
WIDEN_GROUPS = 64


class KernelKind(enum.Enum):
    REF_INT32 = "ref_int32"
    REF_F32 = "ref_f32"
    I2_S = "i2s"
    TL1 = "tl1"
    TL2 = "tl2"


def _check_activation_cover(a: QuantizedActivations, cols: int) -> None:
    if len(a) < cols:
        raise ValueError("dimension mismatch: activations shorter than matrix cols")
    if np.any(a.data[cols:] != 0):
        raise ValueError("dimension mismatch: nonzero activations beyond matrix cols")


def _acts_i32(a: QuantizedActivations, padded_cols: int) -> np.ndarray:
    out = np.zeros(padded_cols, dtype=np.int32)
    n = min(len(a), padded_cols)
    out[:n] = a.data[:n]
    return out


def gemv_ref_int32(m: TernaryMatrix, a: QuantizedActivations) -> GemvResult:
    """Ground-truth oracle: plain int32 multiply-then-add on the ternary values."""
    _check_activation_cover(a, m.cols)
    acc = m.values.astype(np.int32) @ a.data[: m.cols].astype(np.int32)
    return make_result(acc, m.scale, a.scale)


def gemv_f32_ref(m: TernaryMatrix, x) -> GemvResult:
    """fp32 baseline: dequantize the weights and do real-arithmetic dot products."""
    x = np.asarray(x, dtype=np.float32).reshape(-1)
    if x.size != m.cols:
        raise ValueError("dimension mismatch")
    out = m.dequantized(np.float32) @ x
    return GemvResult(accumulators=None, output=out.astype(np.float64))


def _i2s_table(p: PackedI2S, a: QuantizedActivations) -> np.ndarray:
    key = ("i2s", p.padded_cols)
    t = a._cache.get(key)
    if t is None:
        nib = _fast.i2s_nibble_table(_acts_i32(a, p.padded_cols))
        t = _fast.combine_nibble_planes(np.ascontiguousarray(nib[0::2]),
                                        np.ascontiguousarray(nib[1::2]))
        a._cache[key] = t
    return t


def gemv_i2s(p: PackedI2S, a: QuantizedActivations) -> GemvResult:
    """2-bit kernel: weights are decoded on the fly, never materialized."""
    if not p.trusted:
        p.validate()
    _check_activation_cover(a, p.cols)
    table = _i2s_table(p, a)
    acc = np.empty(p.rows, dtype=np.int32)
    _fast.byte_gemv(p.data, table, acc)
    return make_result(acc, p.scale, a.scale)


def _tl1_table(p: PackedTL1, lut: LutTL1) -> np.ndarray:
    t = lut._cache.get("byte_table")
    if t is None:
        bc = p.bytes_per_row
        planes = np.zeros((2 * bc, 16), dtype=np.int32)
        planes[: lut.groups, :9] = lut.entries
        t = _fast.combine_nibble_planes(np.ascontiguousarray(planes[0::2]),
                                        np.ascontiguousarray(planes[1::2]))
        lut._cache["byte_table"] = t
    return t


def gemv_tl1(p: PackedTL1, lut: LutTL1, a_scale: float, *,
             checked: bool = False) -> GemvResult:
    """Pair-index kernel: one 9-entry table lookup per weight pair."""
    if not p.trusted:
        p.validate()
    if lut.groups != p.groups:
        raise ValueError("group-count mismatch")
    if checked:
        nib = np.empty((p.rows, 2 * p.bytes_per_row), dtype=np.uint8)
        nib[:, 0::2] = p.data & 15
        nib[:, 1::2] = p.data >> 4
        vals = lut.entries[np.arange(p.groups), nib[:, : p.groups]]
        acc = _widened_sum(vals)
    else:
        table = _tl1_table(p, lut)
        acc = np.empty(p.rows, dtype=np.int32)
        _fast.byte_gemv(p.data, table, acc)
    return make_result(acc, p.scale, a_scale)


def _tl2_table(p: PackedTL2, lut: LutTL2) -> np.ndarray:
    t = lut._cache.get("byte_table")
    if t is None:
        planes = np.zeros((lut.groups, 16), dtype=np.int32)
        planes[:, :14] = lut.entries
        t = _fast.tl2_signed_table(np.ascontiguousarray(planes[0::2]),
                                   np.ascontiguousarray(planes[1::2]))
        lut._cache["byte_table"] = t
    return t


def gemv_tl2(p: PackedTL2, lut: LutTL2, a_scale: float, *,
             checked: bool = False) -> GemvResult:
    """Sign + index kernel: 14-entry canonical table, sign applied on lookup."""
    if not p.trusted:
        p.validate()
    if lut.groups != p.groups:
        raise ValueError("group-count mismatch")
    if checked:
        idx = p.data_nibbles()
        signs = p.data_signs()
        vals = lut.entries[np.arange(p.groups), idx]
        np.negative(vals, where=signs.astype(bool), out=vals)
        acc = _widened_sum(vals)
    else:
        table = _tl2_table(p, lut)
        acc = np.empty(p.rows, dtype=np.int32)
        _fast.tl2_byte_gemv(p.index_data, p.sign_data, table, acc)
    return make_result(acc, p.scale, a_scale)


def _widened_sum(vals: np.ndarray) -> np.ndarray:
    """Sum int16 table values per row with the 64-group widening discipline.

    Asserts that no running 16-bit partial sum ever leaves [-32767, 32767].
    """
    rows, groups = vals.shape
    blocks = -(-groups // WIDEN_GROUPS)
    padded = np.zeros((rows, blocks * WIDEN_GROUPS), dtype=np.int16)
    padded[:, :groups] = vals
    running = np.cumsum(padded.reshape(rows, blocks, WIDEN_GROUPS), axis=2,
                        dtype=np.int32)
    peak = np.abs(running).max() if running.size else 0
    assert peak <= 32767, f"16-bit partial sum overflow: |{peak}| > 32767"
    return running[:, :, -1].sum(axis=1, dtype=np.int32)


# Chunk edges snap to this row multiple so the float path can issue the same
# fixed BLAS calls for every thread count (integer kernels are exact anyway).
_ROW_BLOCK = 64


def _row_bounds(rows: int, thread_count: int) -> list[tuple[int, int]]:
    n = max(1, min(thread_count, rows))
    edges = np.linspace(0, rows, n + 1, dtype=int)
    snapped = [0] + [min(rows, int(e) // _ROW_BLOCK * _ROW_BLOCK)
                     for e in edges[1:-1]] + [rows]
    return [(lo, hi) for lo, hi in zip(snapped[:-1], snapped[1:]) if hi > lo]


def gemv_parallel(kernel: KernelKind, weights, a, thread_count: int = 1,
                  lut=None) -> GemvResult:
    """Run a GEMV with output rows partitioned contiguously across workers.

    ``weights`` is a TernaryMatrix for the reference kinds and the matching
    packed container otherwise. ``a`` is a QuantizedActivations for integer
    kinds and a real vector for REF_F32. A caller that already built the LUT
    for this activation vector may pass it to skip the rebuild. Results are
    bit-identical for every thread_count.
    """
    if thread_count < 1:
        raise ValueError("thread_count must be >= 1")

    if kernel is KernelKind.REF_F32:
        x = np.asarray(a, dtype=np.float32).reshape(-1)
        if x.size != weights.cols:
            raise ValueError("dimension mismatch")
        deq = weights.dequantized(np.float32)
        out = np.empty(weights.rows, dtype=np.float32)

        def run_f32(lo, hi):
            # one BLAS call per absolute-aligned row block, so the exact same
            # calls happen for every thread count and float rounding matches
            b = lo
            while b < hi:
                e = min(hi, (b // _ROW_BLOCK + 1) * _ROW_BLOCK)
                out[b:e] = deq[b:e] @ x
                b = e

        _run_chunks(run_f32, weights.rows, thread_count)
        return GemvResult(accumulators=None, output=out.astype(np.float64))

    if kernel is KernelKind.REF_INT32:
        _check_activation_cover(a, weights.cols)
        av = a.data[: weights.cols].astype(np.int32)
        acc = np.empty(weights.rows, dtype=np.int32)

        def run_ref(lo, hi):
            acc[lo:hi] = weights.values[lo:hi].astype(np.int32) @ av

        _run_chunks(run_ref, weights.rows, thread_count)
        return make_result(acc, weights.scale, a.scale)

    if not weights.trusted:
        weights.validate()
    _check_activation_cover(a, weights.cols)
    acc = np.empty(weights.rows, dtype=np.int32)

    if kernel is KernelKind.I2_S:
        table = _i2s_table(weights, a)

        def run(lo, hi):
            _fast.byte_gemv(weights.data[lo:hi], table, acc[lo:hi])

    elif kernel is KernelKind.TL1:
        if lut is None:
            lut = build_lut_tl1(a, groups=weights.groups)
        elif lut.groups != weights.groups:
            raise ValueError("group-count mismatch")
        table = _tl1_table(weights, lut)

        def run(lo, hi):
            _fast.byte_gemv(weights.data[lo:hi], table, acc[lo:hi])

    elif kernel is KernelKind.TL2:
        if lut is None:
            lut = build_lut_tl2(a, groups=weights.groups)
        elif lut.groups != weights.groups:
            raise ValueError("group-count mismatch")
        table = _tl2_table(weights, lut)

        def run(lo, hi):
            _fast.tl2_byte_gemv(weights.index_data[lo:hi], weights.sign_data[lo:hi],
                                table, acc[lo:hi])

    else:  # pragma: no cover
        raise ValueError(f"unsupported kernel kind: {kernel}")

    _run_chunks(run, weights.rows, thread_count)
    return make_result(acc, weights.scale, a.scale)


# Worker pools are reused across calls; spawning threads per GEMV would
# dominate the per-token cost at decode batch size 1.
_POOLS: dict[int, ThreadPoolExecutor] = {}
_POOLS_LOCK = threading.Lock()


def _pool(workers: int) -> ThreadPoolExecutor:
    with _POOLS_LOCK:
        p = _POOLS.get(workers)
        if p is None:
            p = _POOLS[workers] = ThreadPoolExecutor(max_workers=workers)
        return p


def _run_chunks(fn, rows: int, thread_count: int) -> None:
    bounds = _row_bounds(rows, thread_count)
    if len(bounds) == 1:
        fn(*bounds[0])
        return
    futures = [_pool(len(bounds)).submit(fn, lo, hi) for lo, hi in bounds]
    for f in futures:
        f.result()
