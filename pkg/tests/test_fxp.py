from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvm.fxp import (
    BitWidthSpec,
    QInterval,
    adder_cost,
    bitwidth_spec,
    overlap_bits,
    qint_add,
    qint_from_fixed,
)
from conftest import iter_values, qint_bits


class TestQintFromFixed:
    def test_int8(self):
        q = qint_from_fixed(BitWidthSpec(1, 8, 8))
        assert (q.low, q.high, q.step) == (-128, 127, 1)

    def test_1bit_unsigned(self):
        q = qint_from_fixed(BitWidthSpec(0, 1, 1))
        assert (q.low, q.high, q.step) == (0, 1, 1)

    def test_fractional(self):
        # direct evaluation of l = -S*2^(I-S), h = 2^(I-S) - 2^(I-W), d = 2^(I-W)
        q = qint_from_fixed(BitWidthSpec(1, 4, 2))
        assert (q.low, q.high, q.step) == (-2, Fraction(7, 4), Fraction(1, 4))


def test_spec_roundtrip_exhaustive():
    for s in (0, 1):
        for w in range(1, 17):
            for i in range(-4, w + 5):
                spec = BitWidthSpec(s, w, i)
                assert bitwidth_spec(qint_from_fixed(spec)) == spec


def _qint_add_oracle(a, b, sign, shift):
    vals = [
        va + sign * vb * Fraction(2) ** shift
        for va in iter_values(a)
        for vb in iter_values(b)
    ]
    return min(vals), max(vals), vals


class TestQintAdd:
    def test_plain_sum(self):
        a = QInterval(0, 3, 0)
        r = qint_add(a, a, 1, 0)
        assert (r.low, r.high, r.step) == (0, 6, 1)

    def test_sub_shift(self):
        a = QInterval(0, 3, 0)
        r = qint_add(a, a, -1, 1)
        lo, hi, vals = _qint_add_oracle(a, a, -1, 1)
        assert (r.low, r.high) == (lo, hi) == (-6, 3)
        assert all(r.contains(v) for v in vals)

    def test_int8_sum_needs_nine_bits(self):
        a = qint_bits(8)
        r = qint_add(a, a, 1, 0)
        assert (r.low, r.high) == (-256, 254)
        assert bitwidth_spec(r).width == 9

    def test_zero_operand_passthrough(self):
        z = QInterval(0, 0, 0)
        a = qint_bits(4)
        assert qint_add(a, z, 1, 3) == a
        r = qint_add(z, a, -1, 2)
        assert (r.low, r.high, r.step_exp) == (-7 * 4, 8 * 4, 2)

    @given(
        wa=st.integers(1, 6),
        wb=st.integers(1, 6),
        sa=st.integers(0, 1),
        sb=st.integers(0, 1),
        sign=st.sampled_from((1, -1)),
        shift=st.integers(-3, 3),
    )
    @settings(max_examples=60, deadline=None)
    def test_sound_and_tight(self, wa, wb, sa, sb, sign, shift):
        a, b = qint_bits(wa, sa), qint_bits(wb, sb)
        r = qint_add(a, b, sign, shift)
        lo, hi, vals = _qint_add_oracle(a, b, sign, shift)
        # soundness: every achievable value is in the interval, on its grid
        for v in vals:
            assert r.contains(v)
        # tightness: both endpoints are achieved
        assert r.low == lo and r.high == hi


class TestAdderCost:
    def test_8_8_0(self):
        assert adder_cost(qint_bits(8), qint_bits(8), 1, 0) == 9

    def test_8_4_2(self):
        assert adder_cost(qint_bits(8), qint_bits(4), 1, 2) == 9

    def test_4_4_neg3(self):
        assert adder_cost(qint_bits(4), qint_bits(4), 1, -3) == 8

    def test_disjoint_is_free(self):
        assert adder_cost(qint_bits(8), qint_bits(8), 1, 8) == 0

    def test_zero_operand_free(self):
        z = QInterval(0, 0, 0)
        assert adder_cost(qint_bits(8), z, 1, 0) == 0
        assert adder_cost(z, qint_bits(8), -1, 0) == 0

    def test_monotone_in_widths(self):
        for shift in (-2, 0, 3):
            prev = None
            for w in range(1, 12):
                c = adder_cost(qint_bits(w), qint_bits(6), 1, shift)
                if prev is not None and c:
                    assert c >= prev
                prev = c
            prev = None
            for w in range(1, 12):
                c = adder_cost(qint_bits(6), qint_bits(w), 1, shift)
                if prev is not None and c:
                    assert c >= prev
                prev = c


class TestOverlapBits:
    def test_identical(self):
        assert overlap_bits(qint_bits(8), qint_bits(8), 0) == 8

    def test_containment(self):
        assert overlap_bits(qint_bits(8), qint_bits(4), 0) == 4

    def test_disjoint(self):
        assert overlap_bits(qint_bits(8), qint_bits(8), 8) == 0

    def test_zero_operand(self):
        assert overlap_bits(QInterval(0, 0, 0), qint_bits(8), 0) == 0


def test_negation_mirrors_interval():
    q = QInterval(-3, 5, 0)
    n = q.negated()
    assert (n.low, n.high, n.step_exp) == (-5, 3, 0)


def test_invalid_intervals_rejected():
    with pytest.raises(ValueError):
        QInterval(3, 1, 0)
    with pytest.raises(ValueError):
        QInterval(0, Fraction(1, 2), 0)  # span not a step multiple
    with pytest.raises(ValueError):
        QInterval(0, Fraction(1, 3), -4)  # non-dyadic bound
