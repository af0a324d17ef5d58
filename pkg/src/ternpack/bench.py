"""Tokens/second benchmark harness over the model-config GEMV workloads.

The per-token workload is the GEMV-only proxy: every projection matrix of
every layer, with freshly quantized random activations. Attention math and KV
caching are deliberately absent; absolute numbers are hardware-specific and
only relative speedups between kernels on the same machine are meaningful.
Timing covers the per-token critical path (activation quantization, LUT
builds, all GEMVs); one-time weight generation and packing are setup.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass

import numpy as np
import psutil

from .core import QuantizedActivations, TernaryMatrix, quantize_activations
from .kernels import KernelKind, gemv_parallel
from .lut import build_lut_tl1, build_lut_tl2
from .packing import (
    encode_i2s,
    encode_tl1,
    encode_tl2,
    i2s_payload_bytes,
    tl1_payload_bytes,
    tl2_payload_bytes,
)
from .runtime import KERNEL_PAD, derive_workload, get_config

__all__ = ["BenchSpec", "BenchResult", "run_bench", "emit_table", "results_to_jsonl",
           "model_bytes", "PROXY_NOTE"]

PROXY_NOTE = ("GEMV-only token proxy (no attention, no KV cache); "
              "tokens/sec are machine-specific, compare kernels relatively")

# headroom so a model that "fits" also leaves room for activations and python
_MEM_SLACK = 256 * 1024 * 1024


@dataclass(frozen=True)
class BenchSpec:
    config: str
    kernel: KernelKind
    thread_count: int = 1
    tokens: int = 8
    warmup: int = 1
    repetitions: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.tokens < 1 or self.repetitions < 1 or self.warmup < 0:
            raise ValueError("tokens and repetitions must be >= 1, warmup >= 0")


@dataclass(frozen=True)
class BenchResult:
    config: str
    kernel: KernelKind
    thread_count: int
    tokens_per_sec: float | None  # median over repetitions; None = N/A
    tps_min: float | None
    tps_max: float | None
    packed_bytes: int | None
    macs_per_token: int
    note: str = ""

    @property
    def available(self) -> bool:
        return self.tokens_per_sec is not None


def model_bytes(config_name: str, kernel: KernelKind) -> int:
    """Resident weight bytes for one whole model in the given kernel's format."""
    wl = derive_workload(get_config(config_name))
    per_layer = 0
    for _, r, c in wl.layer_shapes:
        if kernel is KernelKind.I2_S:
            per_layer += i2s_payload_bytes(r, c)
        elif kernel is KernelKind.TL1:
            per_layer += tl1_payload_bytes(r, c)
        elif kernel is KernelKind.TL2:
            per_layer += sum(tl2_payload_bytes(r, c))
        elif kernel is KernelKind.REF_F32:
            per_layer += 4 * r * c
        else:  # REF_INT32 keeps the int8 ternary values
            per_layer += r * c
    return per_layer * wl.config.num_hidden_layers


def _build_model(config_name: str, kernel: KernelKind, seed: int):
    """Random ternary weights for every workload matrix, stored in kernel format."""
    wl = derive_workload(get_config(config_name))
    rng = np.random.default_rng(seed)
    layers = []
    for _ in range(wl.config.num_hidden_layers):
        mats = []
        for name, r, c in wl.layer_shapes:
            vals = rng.integers(-1, 2, size=(r, c), dtype=np.int8)
            m = TernaryMatrix(rows=r, cols=c, values=vals, scale=1.0)
            if kernel is KernelKind.I2_S:
                mats.append(encode_i2s(m))
            elif kernel is KernelKind.TL1:
                mats.append(encode_tl1(m))
            elif kernel is KernelKind.TL2:
                mats.append(encode_tl2(m))
            elif kernel is KernelKind.REF_F32:
                mats.append(m.dequantized(np.float32))
            else:
                mats.append(m)
            del vals, m
        layers.append(mats)
    return wl, layers


def _token_pass_f32(layers, h, i, rng, threads):
    for mats in layers:
        xh = rng.standard_normal(h).astype(np.float32)
        xi = rng.standard_normal(i).astype(np.float32)
        for j, w in enumerate(mats):
            x = xi if j == 6 else xh
            out = np.empty(w.shape[0], dtype=np.float32)
            _sgemv_chunks(w, x, out, threads)


def _sgemv_chunks(w, x, out, threads):
    from .kernels import _run_chunks

    def run(lo, hi):
        out[lo:hi] = w[lo:hi] @ x

    _run_chunks(run, w.shape[0], threads)


def _token_pass_int(kernel, layers, h, i, rng, threads):
    pad = KERNEL_PAD[kernel]
    for mats in layers:
        qh = quantize_activations(rng.standard_normal(h), pad_to=pad)
        qi = quantize_activations(rng.standard_normal(i), pad_to=pad)
        luts = {}
        if kernel is KernelKind.TL1:
            luts[h] = build_lut_tl1(qh, groups=mats[0].groups)
            luts[i] = build_lut_tl1(qi, groups=mats[6].groups)
        elif kernel is KernelKind.TL2:
            luts[h] = build_lut_tl2(qh, groups=mats[0].groups)
            luts[i] = build_lut_tl2(qi, groups=mats[6].groups)
        for j, w in enumerate(mats):
            qa = qi if j == 6 else qh
            lut = luts.get(i if j == 6 else h)
            gemv_parallel(kernel, w, qa, threads, lut=lut)


def run_bench(spec: BenchSpec) -> BenchResult:
    cfg = get_config(spec.config)
    wl = derive_workload(cfg)
    need = model_bytes(spec.config, spec.kernel)
    packed = need if spec.kernel not in (KernelKind.REF_F32, KernelKind.REF_INT32) else None
    if need + _MEM_SLACK > psutil.virtual_memory().available:
        return BenchResult(config=cfg.name, kernel=spec.kernel,
                           thread_count=spec.thread_count, tokens_per_sec=None,
                           tps_min=None, tps_max=None, packed_bytes=packed,
                           macs_per_token=wl.macs_per_token,
                           note="cannot host the specified model size")

    _, layers = _build_model(spec.config, spec.kernel, spec.seed)
    rng = np.random.default_rng(spec.seed + 1)
    h, i = cfg.hidden_size, cfg.intermediate_size

    def one_token():
        if spec.kernel is KernelKind.REF_F32:
            _token_pass_f32(layers, h, i, rng, spec.thread_count)
        else:
            _token_pass_int(spec.kernel, layers, h, i, rng, spec.thread_count)

    for _ in range(spec.warmup):
        one_token()
    rates = []
    for _ in range(spec.repetitions):
        t0 = time.perf_counter()
        for _ in range(spec.tokens):
            one_token()
        rates.append(spec.tokens / (time.perf_counter() - t0))
    return BenchResult(config=cfg.name, kernel=spec.kernel,
                       thread_count=spec.thread_count,
                       tokens_per_sec=statistics.median(rates),
                       tps_min=min(rates), tps_max=max(rates),
                       packed_bytes=packed, macs_per_token=wl.macs_per_token)


def emit_table(results: list[BenchResult], baseline: KernelKind) -> str:
    """One row per kernel, one column per config, speedups vs the baseline."""
    if not results:
        raise ValueError("no results")
    from .runtime import load_configs

    order = [c.name for c in load_configs()]
    configs = sorted({r.config for r in results}, key=order.index)
    kernels = [baseline] + [k for k in KernelKind
                            if k is not baseline and any(r.kernel is k for r in results)]
    kernels = [k for k in kernels if any(r.kernel is k for r in results)]
    by_key = {(r.config, r.kernel): r for r in results}

    def cell(cfg, kernel):
        r = by_key.get((cfg, kernel))
        if r is None or not r.available:
            return "N/A"
        base = by_key.get((cfg, baseline))
        if kernel is baseline or base is None or not base.available:
            return f"{r.tokens_per_sec:.2f}"
        return f"{r.tokens_per_sec:.2f} ({r.tokens_per_sec / base.tokens_per_sec:.2f}x)"

    width = 18
    lines = [PROXY_NOTE,
             "Kernel".ljust(10) + "".join(c.rjust(width) for c in configs)]
    for k in kernels:
        lines.append(k.value.ljust(10)
                     + "".join(cell(c, k).rjust(width) for c in configs))
    return "\n".join(lines)


def results_to_jsonl(results: list[BenchResult]) -> str:
    lines = []
    for r in results:
        lines.append(json.dumps({
            "config": r.config,
            "kernel": r.kernel.value,
            "threads": r.thread_count,
            "tokens_per_sec": r.tokens_per_sec,
            "tokens_per_sec_min": r.tps_min,
            "tokens_per_sec_max": r.tps_max,
            "bytes": r.packed_bytes,
            "macs_per_token": r.macs_per_token,
            "note": r.note,
        }))
    return "\n".join(lines) + "\n"
