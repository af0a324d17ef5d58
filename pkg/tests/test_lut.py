import itertools

import numpy as np
import pytest

from ternpack.core import QuantizedActivations, quantize_activations
from ternpack.lut import (
    TL1_PATTERNS,
    TL2_PATTERNS,
    build_lut_tl1,
    build_lut_tl2,
)


def qa_from_ints(vals):
    data = np.asarray(vals, dtype=np.int8)
    return QuantizedActivations(data=data, scale=1.0, original_len=len(data))


class TestPatterns:
    def test_tl1_patterns_cover_index_space(self):
        for i, (w0, w1) in enumerate(TL1_PATTERNS):
            assert i == 3 * (w0 + 1) + (w1 + 1)

    def test_tl2_patterns_are_canonical(self):
        # pattern i must be the sign-0 triple whose centered base-3 value is +i
        for i, (w0, w1, w2) in enumerate(TL2_PATTERNS):
            assert 9 * (w0 + 1) + 3 * (w1 + 1) + (w2 + 1) - 13 == i


class TestBuildTl1:
    def test_hand_computed_group(self):
        lut = build_lut_tl1(qa_from_ints([3, -2]))
        assert lut.groups == 1
        assert lut.entries[0, 8] == 1  # (1, 1): 3 - 2
        assert lut.entries[0, 0] == -1  # (-1, -1): -3 + 2
        assert lut.entries[0, 4] == 0  # (0, 0)

    def test_zero_group(self):
        lut = build_lut_tl1(qa_from_ints([0, 0]))
        assert np.all(lut.entries == 0)

    def test_exhaustive_oracle(self):
        rng = np.random.default_rng(7)
        acts = rng.integers(-127, 128, size=64, dtype=np.int8)
        lut = build_lut_tl1(qa_from_ints(acts))
        for g in range(32):
            a = acts[2 * g: 2 * g + 2].astype(int)
            for w0, w1 in itertools.product((-1, 0, 1), repeat=2):
                idx = 3 * (w0 + 1) + (w1 + 1)
                assert lut.entries[g, idx] == w0 * a[0] + w1 * a[1]

    def test_entry_bound(self):
        lut = build_lut_tl1(qa_from_ints([127, -127]))
        assert np.abs(lut.entries).max() == 254


class TestBuildTl2:
    def test_hand_computed_group(self):
        lut = build_lut_tl2(qa_from_ints([1, 2, 3]))
        assert lut.entries[0, 10] == 4  # pattern (1, 0, 1)
        assert lut.entries[0, 13] == 6  # pattern (1, 1, 1)
        assert lut.entries[0, 0] == 0

    def test_zero_group(self):
        lut = build_lut_tl2(qa_from_ints([0, 0, 0]))
        assert np.all(lut.entries == 0)

    def test_exhaustive_oracle_with_mirror(self):
        rng = np.random.default_rng(11)
        acts = rng.integers(-127, 128, size=63, dtype=np.int8)
        lut = build_lut_tl2(qa_from_ints(acts))
        for g in range(21):
            a = acts[3 * g: 3 * g + 3].astype(int)
            for w in itertools.product((-1, 0, 1), repeat=3):
                d = 9 * (w[0] + 1) + 3 * (w[1] + 1) + (w[2] + 1) - 13
                want = w[0] * a[0] + w[1] * a[1] + w[2] * a[2]
                got = lut.entries[g, abs(d)]
                assert (-got if d < 0 else got) == want

    def test_entry_bound(self):
        lut = build_lut_tl2(qa_from_ints([127, -127, 127]))
        assert np.abs(lut.entries).max() == 381


class TestGrouping:
    def test_zero_extension_to_requested_groups(self):
        qa = quantize_activations([1.0, -0.5, 0.25], pad_to=3)
        lut = build_lut_tl2(qa, groups=4)
        assert lut.groups == 4
        assert np.all(lut.entries[1:] == 0)

    def test_too_many_activations_rejected(self):
        qa = quantize_activations([1.0] * 9, pad_to=3)
        with pytest.raises(ValueError):
            build_lut_tl2(qa, groups=2)

    def test_memory_footprint(self):
        qa = quantize_activations(np.arange(1, 25), pad_to=2)
        t1 = build_lut_tl1(qa)
        assert t1.entries.nbytes == (24 // 2) * 9 * 2
        qa3 = quantize_activations(np.arange(1, 25), pad_to=3)
        t2 = build_lut_tl2(qa3)
        assert t2.entries.nbytes == (24 // 3) * 14 * 2
