"""Rational parsing and exact polynomial arithmetic."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as hs

from chainforge.errors import ModelError
from chainforge.exact import (
    Poly,
    as_probability,
    format_rational,
    parse_probability,
    parse_rational,
)


class TestParseRational:
    def test_fraction_form(self):
        assert parse_rational("3/4") == Fraction(3, 4)

    def test_integer_form(self):
        assert parse_rational("-2") == Fraction(-2)
        assert parse_rational("+7") == Fraction(7)

    def test_whitespace_tolerated(self):
        assert parse_rational(" 1/2 ") == Fraction(1, 2)

    @pytest.mark.parametrize("bad", ["0.5", "1e-3", "", "1/0", "a/b", "1/2/3"])
    def test_rejects_non_rational_text(self, bad):
        with pytest.raises(ModelError):
            parse_rational(bad)

    def test_decimal_rejection_explains_the_fix(self):
        with pytest.raises(ModelError, match="1/2"):
            parse_rational("0.5")


class TestProbabilities:
    def test_boundaries_allowed(self):
        assert parse_probability("0") == 0
        assert parse_probability("1") == 1

    @pytest.mark.parametrize("bad", ["5/4", "-1/2", "2"])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(ModelError):
            parse_probability(bad)

    def test_float_input_rejected(self):
        with pytest.raises(ModelError):
            as_probability(0.5)

    def test_fraction_and_int_pass_through(self):
        assert as_probability(Fraction(2, 3)) == Fraction(2, 3)
        assert as_probability(1) == Fraction(1)
        assert as_probability("1/3") == Fraction(1, 3)


class TestFormatRational:
    def test_proper_fraction(self):
        assert format_rational(Fraction(3, 4)) == "3/4"

    def test_integer_value_has_no_denominator(self):
        assert format_rational(Fraction(2)) == "2"
        assert format_rational(Fraction(0)) == "0"

    def test_round_trips_through_parse(self):
        for value in (Fraction(-5, 7), Fraction(10), Fraction(1, 1000000)):
            assert parse_rational(format_rational(value)) == value


class TestPoly:
    def test_constructors(self):
        assert Poly.zero().coeffs == ()
        assert Poly.one().coeffs == (Fraction(1),)
        assert Poly.x().coeffs == (Fraction(0), Fraction(1))
        assert Poly.constant(Fraction(2, 3)).coeffs == (Fraction(2, 3),)

    def test_trailing_zeros_stripped(self):
        assert Poly((1, 0)) == Poly((1,))
        assert Poly((0, 0, 0)).is_zero()

    def test_x_squared(self):
        assert (Poly.x() * Poly.x()).coeffs == (Fraction(0), Fraction(0), Fraction(1))

    def test_eval_horner(self):
        poly = Poly((1, 0, 2))
        assert poly.eval_at(Fraction(1, 2)) == Fraction(3, 2)
        assert poly.eval_at(0) == 1
        assert poly.eval_at(1) == 3

    def test_degree(self):
        assert Poly((1, 0, 2)).degree == 2
        assert Poly.zero().degree == -1

    def test_addition_aligns_lengths(self):
        assert (Poly((1, 2)) + Poly((0, 0, 3))).coeffs == (
            Fraction(1),
            Fraction(2),
            Fraction(3),
        )

    def test_subtraction_can_cancel_to_zero(self):
        assert (Poly((1, 2)) - Poly((1, 2))).is_zero()

    def test_scalar_multiplication_both_sides(self):
        assert (Poly((1, 2)) * 3).coeffs == (Fraction(3), Fraction(6))
        assert (Fraction(1, 2) * Poly((2, 4))).coeffs == (Fraction(1), Fraction(2))

    def test_zero_annihilates_products(self):
        assert (Poly.zero() * Poly((5, 7))).is_zero()

    def test_string_serialization_round_trip(self):
        poly = Poly((Fraction(1), Fraction(0), Fraction(-2, 3)))
        assert Poly.from_strings(poly.to_strings()) == poly

    def test_pretty_rendering(self):
        assert str(Poly((1, 0, 2))) == "1 + 2*p^2"
        assert str(Poly.zero()) == "0"


small_rationals = hs.fractions(
    min_value=-4, max_value=4, max_denominator=12
)
coeff_lists = hs.lists(small_rationals, max_size=5)


class TestPolyAlgebra:
    @given(coeff_lists, coeff_lists, small_rationals)
    def test_sum_evaluates_pointwise(self, a, b, x):
        pa, pb = Poly(a), Poly(b)
        assert (pa + pb).eval_at(x) == pa.eval_at(x) + pb.eval_at(x)

    @given(coeff_lists, coeff_lists, small_rationals)
    def test_product_evaluates_pointwise(self, a, b, x):
        pa, pb = Poly(a), Poly(b)
        assert (pa * pb).eval_at(x) == pa.eval_at(x) * pb.eval_at(x)

    @given(coeff_lists, coeff_lists)
    def test_multiplication_commutes(self, a, b):
        assert Poly(a) * Poly(b) == Poly(b) * Poly(a)

    @given(coeff_lists)
    def test_serialization_is_lossless(self, a):
        poly = Poly(a)
        assert Poly.from_strings(poly.to_strings()) == poly
