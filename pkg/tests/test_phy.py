import itertools

import numpy as np
import pytest

from svmrx.errors import DimensionMismatch
from svmrx.phy import (
    CODE_LAYOUTS,
    N_CLASSES,
    Codeword,
    InfoWord,
    build_frame,
    bpsk_demodulate_hard,
    bpsk_modulate,
    hamming_code,
    hamming_decode_hard,
    hamming_encode,
    pilot_symbols,
)

ALL_WORDS = [InfoWord.from_class(k) for k in range(N_CLASSES)]


def gf2_encode(bits, generator_rows):
    """Row-vector times generator over GF(2), built from explicit rows (oracle)."""
    g = np.array([[int(ch) for ch in row] for row in generator_rows])
    return "".join(str(b) for b in (np.array(bits) @ g) % 2)


SYSTEMATIC_ROWS = ["1000110", "0100101", "0010011", "0001111"]
PARITY_FIRST_ROWS = ["1101000", "0110100", "1110010", "1010001"]


class TestInfoWord:
    @pytest.mark.parametrize("k", range(N_CLASSES))
    def test_class_roundtrip(self, k):
        assert InfoWord.from_class(k).cls == k

    def test_big_endian(self):
        assert InfoWord.from_string("1000").cls == 8
        assert InfoWord.from_string("0001").cls == 1

    @pytest.mark.parametrize("bits", [(0, 1, 2, 0), (0, 1, 1), (1, 0, 0, 0, 1)])
    def test_rejects_invalid(self, bits):
        with pytest.raises(ValueError):
            InfoWord(bits)

    def test_rejects_bad_class(self):
        with pytest.raises(ValueError):
            InfoWord.from_class(16)


class TestEncode:
    @pytest.mark.parametrize("layout", CODE_LAYOUTS)
    def test_zero_word(self, layout):
        assert str(hamming_encode(InfoWord.from_string("0000"), layout)) == "0000000"

    def test_systematic_example(self):
        assert str(hamming_encode(InfoWord.from_string("1000"), "systematic")) == "1000110"

    def test_default_layout_example(self):
        assert str(hamming_encode(InfoWord.from_string("1000"))) == "1101000"

    @pytest.mark.parametrize("layout,rows", [("systematic", SYSTEMATIC_ROWS), ("parity_first", PARITY_FIRST_ROWS)])
    def test_all_words_match_gf2_oracle(self, layout, rows):
        for w in ALL_WORDS:
            assert str(hamming_encode(w, layout)) == gf2_encode(w.bits, rows)

    @pytest.mark.parametrize("layout", CODE_LAYOUTS)
    def test_distinct_with_min_distance_three(self, layout):
        cws = [np.array(hamming_encode(w, layout).bits) for w in ALL_WORDS]
        assert len({tuple(c) for c in cws}) == 16
        dmin = min(int(np.sum(a != b)) for a, b in itertools.combinations(cws, 2))
        assert dmin == 3

    @pytest.mark.parametrize("layout", CODE_LAYOUTS)
    def test_linearity(self, layout):
        for a, b in itertools.product(ALL_WORDS, repeat=2):
            x = InfoWord(tuple(i ^ j for i, j in zip(a.bits, b.bits)))
            lhs = np.array(hamming_encode(x, layout).bits)
            rhs = np.array(hamming_encode(a, layout).bits) ^ np.array(hamming_encode(b, layout).bits)
            np.testing.assert_array_equal(lhs, rhs)

    @pytest.mark.parametrize("layout", CODE_LAYOUTS)
    def test_parity_check_annihilates_codewords(self, layout):
        code = hamming_code(layout)
        assert not np.any((code.codewords @ code.parity_check.T) % 2)

    def test_unknown_layout(self):
        with pytest.raises(ValueError):
            hamming_code("interleaved")


class TestDecode:
    @pytest.mark.parametrize("layout", CODE_LAYOUTS)
    def test_roundtrip(self, layout):
        for w in ALL_WORDS:
            assert hamming_decode_hard(hamming_encode(w, layout), layout) == w

    @pytest.mark.parametrize("layout", CODE_LAYOUTS)
    def test_every_single_error_corrected(self, layout):
        for w in ALL_WORDS:
            c = np.array(hamming_encode(w, layout).bits)
            for q in range(7):
                bad = c.copy()
                bad[q] ^= 1
                assert hamming_decode_hard(bad, layout) == w

    @pytest.mark.parametrize("layout", CODE_LAYOUTS)
    def test_all_ones_matches_minimum_distance_table(self, layout):
        code = hamming_code(layout)
        target = np.ones(7, dtype=int)
        dist = np.sum(code.codewords != target, axis=1)
        assert dist.min() <= 1
        assert hamming_decode_hard(target, layout).cls == int(np.argmin(dist))

    @pytest.mark.parametrize("layout", CODE_LAYOUTS)
    def test_table_is_nearest_codeword_for_every_word(self, layout):
        # perfect code: every 7-bit word lies within distance 1 of exactly one codeword
        code = hamming_code(layout)
        words = (np.arange(128)[:, None] >> np.arange(6, -1, -1)) & 1
        dist = (words[:, None, :] != code.codewords[None, :, :]).sum(axis=2)
        assert np.all(np.sum(dist <= 1, axis=1) == 1)
        np.testing.assert_array_equal(code.decode_bits(words), np.argmin(dist, axis=1))

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            hamming_decode_hard([0, 1, 2, 0, 0, 0, 0])

    def test_batch_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hamming_code().decode_bits(np.zeros((3, 6)))


class TestBpsk:
    def test_zeros(self):
        np.testing.assert_array_equal(bpsk_modulate(Codeword((0,) * 7), 1.0), np.ones(7))

    def test_ones_power_four(self):
        np.testing.assert_array_equal(bpsk_modulate(Codeword((1,) * 7), 4.0), -2 * np.ones(7))

    def test_direct_map(self):
        s = bpsk_modulate(Codeword((1, 0, 1, 0, 1, 1, 0)), 1.0)
        np.testing.assert_array_equal(s, [-1, 1, -1, 1, -1, -1, 1])
        assert np.all(s.imag == 0)

    def test_bad_power(self):
        with pytest.raises(ValueError):
            bpsk_modulate(Codeword((0,) * 7), 0.0)

    def test_demod_ones(self):
        np.testing.assert_array_equal(bpsk_demodulate_hard(np.ones(7)), np.zeros(7))

    def test_demod_uses_real_part_only(self):
        bits = bpsk_demodulate_hard([-0.1 + 5j, 0.1 - 5j, 1, 1, 1, 1, 1])
        assert list(bits[:2]) == [1, 0]

    def test_demod_zero_is_bit_zero(self):
        assert bpsk_demodulate_hard([0.0])[0] == 0

    @pytest.mark.parametrize("layout", CODE_LAYOUTS)
    def test_roundtrip_all_codewords(self, layout):
        for w in ALL_WORDS:
            c = hamming_encode(w, layout)
            np.testing.assert_array_equal(bpsk_demodulate_hard(bpsk_modulate(c, 2.5)), c.bits)


class TestFrame:
    def test_zero_word(self):
        f = build_frame(InfoWord.from_string("0000"), 1.0)
        np.testing.assert_array_equal(f.symbols, np.ones(8))

    @pytest.mark.parametrize("power", [0.5, 1.0, 3.0])
    def test_power_constraint_met_with_equality(self, power):
        for w in ALL_WORDS:
            f = build_frame(w, power)
            assert np.sum(np.abs(f.symbols) ** 2) == pytest.approx(8 * power, rel=1e-12)
            np.testing.assert_allclose(np.abs(f.symbols) ** 2, power, rtol=1e-12)

    def test_systematic_data_example(self):
        f = build_frame(InfoWord.from_string("1000"), 1.0, layout="systematic")
        np.testing.assert_array_equal(f.data, [-1, 1, 1, 1, -1, -1, 1])

    def test_pilot(self):
        np.testing.assert_array_equal(pilot_symbols(4.0), [2.0])
        with pytest.raises(ValueError):
            pilot_symbols(-1.0)
