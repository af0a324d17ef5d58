"""Shared domain types: ternary weight matrices, int8 activations, GEMV results.

All quantization here uses half-away-from-zero rounding so results are
reproducible across platforms and implementations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TernaryMatrix",
    "QuantizedActivations",
    "GemvResult",
    "ternarize_weights",
    "quantize_activations",
    "round_half_away",
    "make_result",
]


def round_half_away(x: np.ndarray | float) -> np.ndarray:
    """Round to nearest integer, ties away from zero (1.5 -> 2, -1.5 -> -2)."""
    x = np.asarray(x, dtype=np.float64)
    return np.trunc(x + np.copysign(0.5, x))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TernaryMatrix:
    """Dense row-major matrix with entries in {-1, 0, +1} and one scalar scale."""

    rows: int
    cols: int
    values: np.ndarray  # int8, shape (rows, cols)
    scale: float

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")
        v = np.asarray(self.values, dtype=np.int8).reshape(self.rows, self.cols)
        if v.size and (v.min() < -1 or v.max() > 1):
            raise ValueError("ternary values must lie in {-1, 0, +1}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be positive and finite")
        object.__setattr__(self, "values", _freeze(v))
        object.__setattr__(self, "scale", float(self.scale))

    def dequantized(self, dtype=np.float32) -> np.ndarray:
        return self.values.astype(dtype) * dtype(self.scale)


@dataclass(frozen=True)
class QuantizedActivations:
    """int8 activation vector with absmax scale; may carry trailing zero padding."""

    data: np.ndarray  # int8, shape (K,)
    scale: float
    original_len: int
    # derived byte tables, memoized by the kernels; a pure function of data
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.int8).reshape(-1)
        if self.original_len < 1 or self.original_len > d.size:
            raise ValueError("original_len must be in [1, len(data)]")
        if d.size and int(d.min()) < -127:
            raise ValueError("activation value -128 is never produced")
        if np.any(d[self.original_len:] != 0):
            raise ValueError("padding entries must be zero")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be positive and finite")
        object.__setattr__(self, "data", _freeze(d))
        object.__setattr__(self, "scale", float(self.scale))

    def __len__(self) -> int:
        return self.data.size


@dataclass(frozen=True)
class GemvResult:
    """Exact int32 accumulators plus the dequantized real outputs.

    ``accumulators`` is None only for the fp32 reference kernel, which has no
    integer path.
    """

    accumulators: np.ndarray | None  # int32, shape (rows,)
    output: np.ndarray  # float64, shape (rows,)


def make_result(acc: np.ndarray, weight_scale: float, act_scale: float) -> GemvResult:
    out = acc.astype(np.float64) * float(weight_scale) * float(act_scale)
    return GemvResult(accumulators=_freeze(acc.astype(np.int32)), output=_freeze(out))


def ternarize_weights(weights, rows: int, cols: int) -> TernaryMatrix:
    """Absmean ternarization: scale = mean|w|, entries = clamp(round(w/scale))."""
    w = np.asarray(weights, dtype=np.float64).reshape(rows, cols)
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    scale = float(np.mean(np.abs(w)))
    if scale == 0.0:
        raise ValueError("degenerate weight matrix")
    q = np.clip(round_half_away(w / scale), -1, 1).astype(np.int8)
    return TernaryMatrix(rows=rows, cols=cols, values=q, scale=scale)


def quantize_activations(x, pad_to: int = 1) -> QuantizedActivations:
    """Absmax int8 quantization, zero-padded to the next multiple of ``pad_to``.

    A zero vector gets scale 1 so downstream GEMV exactly produces 0.
    """
    if pad_to not in (1, 2, 3, 4):
        raise ValueError("pad_to must be in {1, 2, 3, 4}")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size < 1:
        raise ValueError("empty activation vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("activations must be finite")
    amax = float(np.max(np.abs(x)))
    scale = amax / 127.0 if amax > 0.0 else 1.0
    q = np.clip(round_half_away(x / scale), -127, 127).astype(np.int8)
    padded = -(-x.size // pad_to) * pad_to
    data = np.zeros(padded, dtype=np.int8)
    data[: x.size] = q
    return QuantizedActivations(data=data, scale=scale, original_len=x.size)
