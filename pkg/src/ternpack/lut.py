"""Per-activation-group lookup tables of partial dot products for TL1 and TL2.

A table is rebuilt for every activation vector (every token, every layer) and
shared by all output rows of one GEMV. Entries fit int16 for int8 activations:
|entry| <= 2*127 = 254 (TL1) and 3*127 = 381 (TL2).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import QuantizedActivations, _freeze

__all__ = ["LutTL1", "LutTL2", "build_lut_tl1", "build_lut_tl2",
           "TL1_PATTERNS", "TL2_PATTERNS"]

# Pattern i of TL1 is the weight pair (i // 3 - 1, i % 3 - 1).
TL1_PATTERNS = np.array([(i // 3 - 1, i % 3 - 1) for i in range(9)], dtype=np.int8)

# Pattern i of TL2 is the canonical (sign-0) triple with base-3 value i + 13.
TL2_PATTERNS = np.array(
    [((i + 13) // 9 - 1, (i + 13) // 3 % 3 - 1, (i + 13) % 3 - 1) for i in range(14)],
    dtype=np.int8,
)


@dataclass(frozen=True)
class LutTL1:
    groups: int
    entries: np.ndarray  # int16, shape (groups, 9)
    # derived byte tables, memoized by the kernels; a pure function of entries
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int16).reshape(self.groups, 9)
        object.__setattr__(self, "entries", _freeze(e))


@dataclass(frozen=True)
class LutTL2:
    groups: int
    entries: np.ndarray  # int16, shape (groups, 14); sign applied at accumulation
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int16).reshape(self.groups, 14)
        object.__setattr__(self, "entries", _freeze(e))


def _grouped(a: QuantizedActivations, group: int, groups: int | None) -> np.ndarray:
    n = len(a)
    if groups is None:
        groups = -(-max(n, group) // group)
    total = groups * group
    if a.original_len > total:
        raise ValueError("activation vector longer than the requested table")
    # zero-extend: absent activations contribute nothing to any pattern
    g = np.zeros(total, dtype=np.float32)
    g[:n] = a.data[: min(n, total)]
    return g.reshape(groups, group)


def _exact_dot(groups_f32: np.ndarray, patterns: np.ndarray) -> np.ndarray:
    # float32 matmul is exact here: products are integers <= 127 and partial
    # sums stay far below 2**24
    e = groups_f32 @ patterns.astype(np.float32).T
    return e.astype(np.int16)


def build_lut_tl1(a: QuantizedActivations, groups: int | None = None) -> LutTL1:
    """Table of all 9 pair dot products per pair of activations."""
    g = _grouped(a, 2, groups)
    return LutTL1(groups=g.shape[0], entries=_exact_dot(g, TL1_PATTERNS))


def build_lut_tl2(a: QuantizedActivations, groups: int | None = None) -> LutTL2:
    """Table of the 14 canonical triple dot products per activation triple.

    The 13 mirrored patterns are obtained by negating the entry at lookup time.
    """
    g = _grouped(a, 3, groups)
    return LutTL2(groups=g.shape[0], entries=_exact_dot(g, TL2_PATTERNS))
