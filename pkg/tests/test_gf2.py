import numpy as np
import pytest

from cltukit.gf2 import (BinaryMatrix, BitWord, QcSpec, QcToken,
                         RankDeficientError, expand_qc, hamming_distance,
                         overlap, systematic_forms, weight)
from cltukit.scrambler import KEYSTREAM_128_HEX

from conftest import random_word


class TestBitWord:
    def test_hex_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            length = 4 * int(rng.integers(1, 40))
            w = random_word(rng, length)
            assert BitWord.from_hex(w.to_hex()) == w

    def test_parse_ignores_whitespace_and_case(self):
        w = BitWord.from_hex("ff39 9e5a\n68E9 06F5 6C89 2FA1 315E 08C0")
        assert w.length == 128
        assert w.to_hex() == KEYSTREAM_128_HEX

    def test_bit_zero_is_msb_of_first_hex_char(self):
        w = BitWord.from_hex("80", 8)
        assert w.bit(0) == 1
        assert all(w.bit(i) == 0 for i in range(1, 8))

    def test_value_range_enforced(self):
        with pytest.raises(ValueError):
            BitWord(4, 16)
        with pytest.raises(ValueError):
            BitWord(0, 0)

    def test_unit_and_support(self):
        e3 = BitWord.unit(8, 3)
        assert e3.support() == (3,)
        assert e3.weight == 1

    def test_halves_and_concat(self):
        w = BitWord.from_hex("ABCD")
        left, right = w.halves()
        assert left.to_hex() == "AB"
        assert right.to_hex() == "CD"
        assert left.concat(right) == w

    def test_slice(self):
        w = BitWord.from_hex("ABCD")
        assert w.slice(4, 12).to_hex() == "BC"

    def test_qc_shift_cycle(self):
        rng = np.random.default_rng(1)
        w = random_word(rng, 128)
        shifted = w
        for _ in range(16):
            shifted = shifted.qc_shift(16)
        assert shifted == w
        assert w.qc_shift(16, 3).weight == w.weight

    def test_alternating(self):
        assert BitWord.alternating(8, 0).to_hex() == "55"
        assert BitWord.alternating(8, 1).to_hex() == "AA"


class TestDistances:
    def test_identical_words(self):
        rng = np.random.default_rng(2)
        a = random_word(rng, 64)
        assert hamming_distance(a, a) == 0
        assert overlap(a, a) == weight(a)

    def test_alternating_vs_zero(self):
        a = BitWord.alternating(128, 0)
        z = BitWord.zeros(128)
        assert hamming_distance(a, z) == 64
        assert weight(a) == 64
        assert overlap(a, z) == 0

    def test_keystream_weight_against_popcount_oracle(self):
        # independent popcount over the raw hex digits
        expected = bin(int(KEYSTREAM_128_HEX, 16)).count("1")
        assert expected == 63
        assert weight(BitWord.from_hex(KEYSTREAM_128_HEX)) == expected

    def test_distance_is_weight_of_xor(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            n = int(rng.integers(1, 200))
            a, b = random_word(rng, n), random_word(rng, n)
            assert hamming_distance(a, b) == weight(a ^ b)

    def test_overlap_identity(self):
        rng = np.random.default_rng(4)
        for _ in range(300):
            n = int(rng.integers(1, 200))
            a, b = random_word(rng, n), random_word(rng, n)
            assert overlap(a, b) == (weight(a) + weight(b)
                                     - hamming_distance(a, b)) // 2

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            hamming_distance(BitWord.zeros(8), BitWord.zeros(9))
        with pytest.raises(ValueError):
            overlap(BitWord.zeros(8), BitWord.zeros(9))


class TestQcSpec:
    def test_parse_render_round_trip(self):
        text = "M=4\nI+P3,Z\nP0,I\n"
        spec = QcSpec.parse(text)
        assert spec.block_size == 4
        assert QcSpec.parse(spec.render()) == spec

    def test_bad_exponent_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            QcSpec.parse("M=4\nP4,I\n")

    def test_missing_header(self):
        with pytest.raises(ValueError, match="header"):
            QcSpec.parse("P1,I\n")

    def test_bad_token(self):
        with pytest.raises(ValueError):
            QcToken.parse("Q3")

    def test_identity_block(self):
        spec = QcSpec.parse("M=3\nI\n")
        assert expand_qc(spec) == BinaryMatrix.identity(3)

    def test_identity_plus_shift_zero_cancels(self):
        spec = QcSpec.parse("M=2\nI+P0\n")
        assert expand_qc(spec) == BinaryMatrix.zeros(2, 2)

    def test_all_identity_grid_is_block_diagonal(self):
        spec = QcSpec.parse("M=3\nI,Z\nZ,I\n")
        assert expand_qc(spec) == BinaryMatrix.identity(6)

    def test_shift_convention(self):
        # row j of P1 has its 1 at column j+1 (mod M)
        m = expand_qc(QcSpec.parse("M=3\nP1\n")).a
        assert m[0, 1] == 1 and m[1, 2] == 1 and m[2, 0] == 1


class TestSystematicForms:
    def test_symmetric_toy(self):
        h = BinaryMatrix(np.hstack([np.eye(2, dtype=np.uint8),
                                    np.eye(2, dtype=np.uint8)]))
        forms = systematic_forms(h)
        expect = np.hstack([np.eye(2, dtype=np.uint8),
                            np.eye(2, dtype=np.uint8)])
        assert np.array_equal(forms.g_left.a, expect)
        assert np.array_equal(forms.g_right.a, expect)
        assert forms.column_permutation is None

    def test_rank_deficient_raises_with_rank(self):
        h = BinaryMatrix(np.array([[1, 0, 1, 0], [1, 0, 1, 0]]))
        with pytest.raises(RankDeficientError) as exc:
            systematic_forms(h)
        assert exc.value.rank == 1

    def test_singular_pivot_block_permutes_and_warns(self):
        # right half [[1,1],[1,1]] is singular but swapping a column in
        # from the left half fixes both forms
        h = BinaryMatrix(np.array([[1, 0, 1, 1], [0, 1, 1, 1]]))
        with pytest.warns(UserWarning, match="permuted"):
            forms = systematic_forms(h)
        assert forms.column_permutation is not None
        perm = list(forms.column_permutation)
        h_perm = BinaryMatrix(h.a[:, perm])
        for g in (forms.g_left, forms.g_right):
            prod = (g.a.astype(int) @ h_perm.a.T) % 2
            assert not prod.any()

    def test_unsatisfiable_permutation_rejected(self):
        # an all-zero column lands in one pivot block no matter what
        h = BinaryMatrix(np.array([[1, 0, 1, 0], [0, 1, 1, 0]]))
        with pytest.raises(RuntimeError, match="permutation"):
            systematic_forms(h)

    def test_random_codes_generators_in_kernel(self):
        rng = np.random.default_rng(5)
        done = 0
        while done < 20:
            r = int(rng.integers(2, 6))
            n = 2 * r
            a = rng.integers(0, 2, (r, n)).astype(np.uint8)
            h = BinaryMatrix(a)
            if h.rank < r:
                continue
            import warnings
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    forms = systematic_forms(h)
            except RuntimeError:
                continue  # no column split admits both forms
            done += 1
            cols = list(forms.column_permutation) if forms.column_permutation \
                else list(range(n))
            h_used = BinaryMatrix(h.a[:, cols])
            for g in (forms.g_left, forms.g_right):
                assert g.rank == n - r
                assert not ((g.a.astype(int) @ h_used.a.T) % 2).any()
