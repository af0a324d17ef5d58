import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ternpack.core import TernaryMatrix
from ternpack.packing import (
    PackedI2S,
    PackedTL1,
    PackedTL2,
    decode_i2s,
    decode_tl1,
    decode_tl2,
    encode_i2s,
    encode_tl1,
    encode_tl2,
    i2s_payload_bytes,
    tl1_payload_bytes,
    tl2_payload_bytes,
    tl1_index,
    tl2_code,
)

TERNARY = (-1, 0, 1)


def tmat(values, scale=1.0):
    v = np.asarray(values, dtype=np.int8)
    return TernaryMatrix(v.shape[0], v.shape[1], v, scale)


def random_tmat(rng, rows, cols):
    return TernaryMatrix(rows, cols,
                         rng.integers(-1, 2, size=(rows, cols), dtype=np.int8),
                         float(rng.uniform(0.1, 3.0)))


class TestTl1Index:
    def test_published_rows(self):
        # the full 9-row pair table
        expected = {(-1, -1): 0, (-1, 0): 1, (-1, 1): 2,
                    (0, -1): 3, (0, 0): 4, (0, 1): 5,
                    (1, -1): 6, (1, 0): 7, (1, 1): 8}
        for pair, idx in expected.items():
            assert tl1_index(*pair) == idx

    def test_bijection(self):
        seen = {tl1_index(a, b) for a in TERNARY for b in TERNARY}
        assert seen == set(range(9))

    def test_rejects_non_ternary(self):
        with pytest.raises(ValueError):
            tl1_index(2, 0)


class TestTl2Code:
    def test_published_rows(self):
        assert tl2_code(-1, -1, -1) == (1, 0b1101)
        assert tl2_code(-1, -1, 0) == (1, 0b1100)
        assert tl2_code(-1, -1, 1) == (1, 0b1011)
        assert tl2_code(-1, 0, -1) == (1, 0b1010)
        assert tl2_code(0, 0, 0) == (0, 0b0000)
        assert tl2_code(1, 0, 1) == (0, 0b1010)
        assert tl2_code(1, 1, -1) == (0, 0b1011)
        assert tl2_code(1, 1, 0) == (0, 0b1100)
        assert tl2_code(1, 1, 1) == (0, 0b1101)

    def test_bijection_onto_code_space(self):
        codes = {tl2_code(*t) for t in itertools.product(TERNARY, repeat=3)}
        assert len(codes) == 27
        expected = {(0, 0)} | {(s, i) for s in (0, 1) for i in range(1, 14)}
        assert codes == expected

    def test_mirror_symmetry(self):
        for t in itertools.product(TERNARY, repeat=3):
            s, i = tl2_code(*t)
            ms, mi = tl2_code(*(-w for w in t))
            assert mi == i
            if t != (0, 0, 0):
                assert ms == 1 - s

    def test_canonical_zero(self):
        assert tl2_code(0, 0, 0) == (0, 0)


class TestI2S:
    def test_single_weight_codes(self):
        for w, code in [(-1, 0b00), (0, 0b01), (1, 0b10)]:
            p = encode_i2s(tmat([[w]]))
            assert p.data[0, 0] & 3 == code

    def test_byte_layout(self):
        assert encode_i2s(tmat([[-1, 0, 1, 0]])).data[0, 0] == 0x64

    def test_padding_byte(self):
        p = encode_i2s(tmat([[1]]))
        assert p.padded_cols == 4
        assert p.data[0, 0] == 0x56

    def test_decode_byte(self):
        p = PackedI2S(rows=1, cols=4, padded_cols=4,
                      data=np.array([[0x64]], dtype=np.uint8), scale=1.0)
        assert decode_i2s(p).values.ravel().tolist() == [-1, 0, 1, 0]

    def test_reserved_code_rejected(self):
        p = PackedI2S(rows=1, cols=4, padded_cols=4,
                      data=np.array([[0xFF]], dtype=np.uint8), scale=1.0)
        with pytest.raises(ValueError, match="invalid I2_S code"):
            decode_i2s(p)
        with pytest.raises(ValueError, match="invalid I2_S code"):
            p.validate()


class TestTL1:
    def test_byte_layout(self):
        assert encode_tl1(tmat([[0, 1, 1, -1]])).data[0, 0] == 0x65

    def test_invalid_nibble_rejected(self):
        p = PackedTL1(rows=1, cols=4, padded_cols=4,
                      data=np.array([[0xF5]], dtype=np.uint8), scale=1.0)
        with pytest.raises(ValueError, match="invalid TL1 index"):
            decode_tl1(p)

    def test_odd_cols_filler(self):
        p = encode_tl1(tmat([[1, -1, 0]]))
        assert p.padded_cols == 4
        assert decode_tl1(p).values.ravel().tolist() == [1, -1, 0]


class TestTL2:
    def test_plane_layout(self):
        p = encode_tl2(tmat([[1, 1, 1, -1, -1, 0]]))
        assert p.index_data[0, 0] == 0xCD
        assert p.sign_data[0, 0] == 0b00000010

    def test_invalid_index_rejected(self):
        p = encode_tl2(tmat([[1, 1, 1, -1, -1, 0]]))
        bad = PackedTL2(rows=1, cols=6, padded_cols=6,
                        index_data=np.array([[0xED]], dtype=np.uint8),
                        sign_data=p.sign_data, scale=1.0)
        with pytest.raises(ValueError, match="invalid TL2 index"):
            decode_tl2(bad)

    def test_non_canonical_zero_rejected(self):
        bad = PackedTL2(rows=1, cols=6, padded_cols=6,
                        index_data=np.array([[0x00]], dtype=np.uint8),
                        sign_data=np.array([[0b01]], dtype=np.uint8), scale=1.0)
        with pytest.raises(ValueError, match="non-canonical zero"):
            decode_tl2(bad)

    def test_payload_bits_per_weight(self):
        # cols divisible by 6: TL1 = 2 bits/weight, TL2 = 5/3
        rows, cols = 16, 96
        tl1 = tl1_payload_bytes(rows, cols)
        idx, sgn = tl2_payload_bytes(rows, cols)
        assert tl1 * 8 / (rows * cols) == 2.0
        assert idx * 8 / (rows * cols) == pytest.approx(4 / 3)
        assert (idx + sgn) * 8 / (rows * cols) == pytest.approx(5 / 3)
        assert (idx + sgn) / tl1 == pytest.approx(5 / 6)


class TestRoundtrips:
    @pytest.mark.parametrize("cols", list(range(1, 25)))
    def test_all_cols_mod_12_residues(self, cols):
        rng = np.random.default_rng(cols)
        m = random_tmat(rng, 5, cols)
        for enc, dec in [(encode_i2s, decode_i2s), (encode_tl1, decode_tl1),
                         (encode_tl2, decode_tl2)]:
            m2 = dec(enc(m))
            assert np.array_equal(m.values, m2.values)
            assert m2.scale == m.scale

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 40), st.integers(0, 2**32 - 1))
    def test_roundtrip_property(self, rows, cols, seed):
        m = random_tmat(np.random.default_rng(seed), rows, cols)
        assert np.array_equal(decode_i2s(encode_i2s(m)).values, m.values)
        assert np.array_equal(decode_tl1(encode_tl1(m)).values, m.values)
        assert np.array_equal(decode_tl2(encode_tl2(m)).values, m.values)

    def test_payload_sizes_match_formulas(self):
        rng = np.random.default_rng(0)
        for cols in (1, 4, 6, 7, 12, 13, 63, 64, 768):
            m = random_tmat(rng, 3, cols)
            assert encode_i2s(m).data.size == i2s_payload_bytes(3, cols)
            assert encode_tl1(m).data.size == tl1_payload_bytes(3, cols)
            p = encode_tl2(m)
            idx, sgn = tl2_payload_bytes(3, cols)
            assert p.index_data.size == idx
            assert p.sign_data.size == sgn

    def test_reference_768_sizes(self):
        assert i2s_payload_bytes(768, 768) == 147456
        assert tl1_payload_bytes(768, 768) == 147456
        idx, sgn = tl2_payload_bytes(768, 768)
        assert idx == 98304
        # 768 triples-of-signs per row pack into 32 bytes: 768*32 = 24576,
        # which preserves the exact 5/6 total-size ratio vs TL1
        assert sgn == 24576
        assert (idx + sgn) / 147456 == pytest.approx(5 / 6)
