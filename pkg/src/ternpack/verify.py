"""Cross-kernel exactness suite: every packed kernel vs the integer oracle."""

from __future__ import annotations

import numpy as np

from .core import TernaryMatrix, quantize_activations
from .kernels import KernelKind, gemv_i2s, gemv_ref_int32, gemv_tl1, gemv_tl2
from .lut import build_lut_tl1, build_lut_tl2
from .packing import encode_i2s, encode_tl1, encode_tl2

__all__ = ["cross_kernel_suite", "check_instance", "PACKED_KERNELS"]

PACKED_KERNELS = (KernelKind.I2_S, KernelKind.TL1, KernelKind.TL2)


def check_instance(m: TernaryMatrix, x: np.ndarray) -> dict[KernelKind, bool]:
    """True per kernel iff its accumulators match the oracle's bit-exactly."""
    ref = gemv_ref_int32(m, quantize_activations(x, pad_to=1))
    pi = encode_i2s(m)
    pt1 = encode_tl1(m)
    pt2 = encode_tl2(m)
    qa4 = quantize_activations(x, pad_to=4)
    qa2 = quantize_activations(x, pad_to=2)
    qa3 = quantize_activations(x, pad_to=3)
    r_i2s = gemv_i2s(pi, qa4)
    r_tl1 = gemv_tl1(pt1, build_lut_tl1(qa2, groups=pt1.groups), qa2.scale)
    r_tl2 = gemv_tl2(pt2, build_lut_tl2(qa3, groups=pt2.groups), qa3.scale)
    return {
        KernelKind.I2_S: bool(np.array_equal(ref.accumulators, r_i2s.accumulators)),
        KernelKind.TL1: bool(np.array_equal(ref.accumulators, r_tl1.accumulators)),
        KernelKind.TL2: bool(np.array_equal(ref.accumulators, r_tl2.accumulators)),
    }


def _instance_shape(i: int, rng: np.random.Generator) -> tuple[int, int]:
    # mostly an exhaustive-ish sweep of tiny shapes (all cols mod 12 residues),
    # with a sampled larger shape mixed in every 8th instance
    if i % 8 == 7:
        return int(rng.integers(1, 65)), int(rng.integers(1, 513))
    j = i % 128
    return j // 16 + 1, j % 16 + 1


def cross_kernel_suite(instances: int, seed: int = 0,
                       progress=None) -> dict[KernelKind, int]:
    """Run ``instances`` random GEMV comparisons; returns mismatches per kernel."""
    if instances < 1:
        raise ValueError("instances must be >= 1")
    rng = np.random.default_rng(seed)
    mismatches = {k: 0 for k in PACKED_KERNELS}
    for i in range(instances):
        rows, cols = _instance_shape(i, rng)
        vals = rng.integers(-1, 2, size=(rows, cols), dtype=np.int8)
        m = TernaryMatrix(rows=rows, cols=cols, values=vals,
                          scale=float(rng.uniform(0.1, 2.0)))
        x = rng.standard_normal(cols) * float(rng.uniform(0.01, 10.0))
        ok = check_instance(m, x)
        for k, good in ok.items():
            if not good:
                mismatches[k] += 1
        if progress is not None and (i + 1) % 1000 == 0:
            progress(i + 1, instances)
    return mismatches
