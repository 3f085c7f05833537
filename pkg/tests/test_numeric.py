from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import relative_error, taylor_by_differences
from orderfour.numeric import (
    DivisionByZeroJet,
    DomainErrorJet,
    Jet4,
    Precision,
    format_sci,
    jet_arith,
    jet_constant,
    jet_from,
    jet_func,
    jet_variable,
    ulp,
)


def coeffs(jet):
    return list(jet.coeffs)


class TestPrecision:
    def test_default_is_300_digits(self):
        assert Precision().decimal_digits == 300

    @pytest.mark.parametrize("digits", [0, 49, -5])
    def test_rejects_low_precision(self, digits):
        with pytest.raises(ValueError):
            Precision(digits)

    def test_contexts_are_isolated(self):
        import mpmath

        before = mpmath.mp.dps
        a = Precision(300).real(1) / 3
        b = Precision(60).real(1) / 3
        assert mpmath.mp.dps == before
        assert a.context.dps == 300 and b.context.dps == 60
        assert a != b

    def test_decimal_literal_is_rounded_once(self, p300):
        # 2.87 read straight from decimal, not through a binary double
        x = p300.real("2.87")
        assert abs(x - p300.real(287) / 100) <= ulp(x)
        assert abs(x - p300.real(2.87)) > p300.real("1e-20")

    def test_fraction_conversion(self, p60):
        assert p60.real(Fraction(2, 3)) == p60.real(2) / 3

    def test_constants_at_full_precision(self, p300):
        ctx = p300.ctx
        assert abs(ctx.sin(ctx.pi)) < p300.floor(5)
        assert abs(ctx.ln(ctx.e) - 1) < p300.floor(5)


class TestFormatSci:
    def test_fixed_digit_count(self, p60):
        assert format_sci(p60.real(5), 5) == "5.0000e+0"
        assert format_sci(p60.real("-0.000123456"), 3) == "-1.23e-4"

    def test_zero(self, p60):
        assert format_sci(p60.real(0), 3) == "0.00e+0"


class TestJetVariable:
    @pytest.mark.parametrize("x", ["3", "0", "-2.5"])
    def test_identity_jet(self, p60, x):
        assert coeffs(jet_variable(p60.real(x))) == [p60.real(x), 1, 0, 0, 0]


class TestJetArith:
    def test_square(self, p60):
        v = jet_variable(p60.real(3))
        assert coeffs(jet_arith("mul", v, v)) == [9, 6, 1, 0, 0]

    def test_add(self, p60):
        out = jet_arith("add", jet_from([1, 0, 0, 0, 0], p60), jet_from([0, 1, 0, 0, 0], p60))
        assert coeffs(out) == [1, 1, 0, 0, 0]

    def test_reciprocal_matches_closed_form(self, p60):
        out = jet_arith("div", jet_from([1, 0, 0, 0, 0], p60), jet_variable(p60.real(2)))
        expected = [Fraction((-1) ** k, 2 ** (k + 1)) for k in range(5)]
        assert coeffs(out) == [p60.real(e) for e in expected]
        assert coeffs(out) == [0.5, -0.25, 0.125, -0.0625, 0.03125]

    def test_neg_and_sub(self, p60):
        v = jet_variable(p60.real(2))
        assert coeffs(jet_arith("neg", v)) == [-2, -1, 0, 0, 0]
        assert coeffs(jet_arith("sub", v, v)) == [0] * 5

    def test_division_by_zero_constant_term(self, p60):
        with pytest.raises(DivisionByZeroJet):
            jet_arith("div", jet_constant(p60.real(1)), jet_variable(p60.real(0)))

    def test_integer_power_of_negative_base(self, p60):
        v = jet_variable(p60.real(-2))
        # x^3 at -2: -8, 12, -6, 1, 0
        assert coeffs(jet_arith("pow", v, jet_constant(p60.real(3)))) == [-8, 12, -6, 1, 0]

    def test_negative_integer_power(self, p60):
        v = jet_variable(p60.real(2))
        out = jet_arith("pow", v, jet_constant(p60.real(-1)))
        assert coeffs(out) == [0.5, -0.25, 0.125, -0.0625, 0.03125]

    def test_fractional_power_matches_sqrt(self, p60):
        v = jet_variable(p60.real("1.7"))
        a = jet_arith("pow", v, jet_constant(p60.real("0.5")))
        b = jet_func("sqrt", v)
        for x, y in zip(a, b):
            assert relative_error(x, y) < p60.floor(5)

    def test_fractional_power_of_negative_base(self, p60):
        with pytest.raises(DomainErrorJet):
            jet_arith("pow", jet_variable(p60.real(-1)), jet_constant(p60.real("0.5")))

    def test_variable_exponent(self, p60):
        # x^x at 1 = exp(x ln x): 1, 1, 1, 1/2, 1/3
        v = jet_variable(p60.real(1))
        out = jet_arith("pow", v, v)
        expected = [1, 1, 1, Fraction(1, 2), Fraction(1, 3)]
        for got, want in zip(out, expected):
            assert abs(got - p60.real(want)) < p60.floor(5)

    def test_unknown_op(self, p60):
        with pytest.raises(ValueError):
            jet_arith("mod", jet_variable(p60.real(1)), jet_variable(p60.real(1)))


class TestJetFunc:
    def test_exp_maclaurin(self, p60):
        out = jet_func("exp", jet_variable(p60.real(0)))
        expected = [1, 1, Fraction(1, 2), Fraction(1, 6), Fraction(1, 24)]
        assert coeffs(out) == [p60.real(e) for e in expected]

    def test_sin_maclaurin(self, p60):
        out = jet_func("sin", jet_variable(p60.real(0)))
        assert coeffs(out) == [0, 1, 0, p60.real(-1) / 6, 0]

    def test_cos_maclaurin(self, p60):
        out = jet_func("cos", jet_variable(p60.real(0)))
        assert coeffs(out) == [1, 0, p60.real(-1) / 2, 0, p60.real(1) / 24]

    @pytest.mark.parametrize("name", ["ln", "sqrt"])
    @pytest.mark.parametrize("x", ["0", "-1"])
    def test_domain(self, p60, name, x):
        with pytest.raises(DomainErrorJet):
            jet_func(name, jet_variable(p60.real(x)))

    def test_unknown_function(self, p60):
        with pytest.raises(ValueError):
            jet_func("tan", jet_variable(p60.real(0)))


GRID = {
    "exp": ["-2", "-0.5", "0.3", "1", "2.7"],
    "sin": ["-2", "-0.5", "0.3", "1", "2.7"],
    "cos": ["-2", "-0.5", "0.3", "1", "2.7"],
    "ln": ["0.2", "0.9", "1", "3.5", "40"],
    "sqrt": ["0.2", "0.9", "1", "3.5", "40"],
}


def finite_difference_cases():
    return [(name, x) for name, xs in GRID.items() for x in xs]


@pytest.mark.parametrize("name,x", finite_difference_cases())
def test_jet_func_matches_finite_differences(p300, p600, name, x):
    jet = jet_func(name, jet_variable(p300.real(x)))
    reference = taylor_by_differences(getattr(p600.ctx, name), x, p600)
    for k in range(5):
        assert relative_error(p600.real(jet[k]), reference[k]) <= 1e-20, (name, x, k)


def test_precision_refinement_is_stable(p300, p600):
    tol = p600.real("1e-290")
    for name, x in finite_difference_cases():
        lo = jet_func(name, jet_variable(p300.real(x)))
        hi = jet_func(name, jet_variable(p600.real(x)))
        for a, b in zip(lo, hi):
            assert relative_error(p600.real(a), b) <= tol


jet_values = st.lists(
    st.floats(min_value=-8, max_value=8, allow_nan=False, allow_infinity=False), min_size=5, max_size=5
)


@settings(max_examples=60, deadline=None)
@given(jet_values, jet_values)
def test_mul_commutes(a, b):
    p = Precision(60)
    ja, jb = jet_from(a, p), jet_from(b, p)
    assert coeffs(ja * jb) == coeffs(jb * ja)


@settings(max_examples=60, deadline=None)
@given(jet_values, jet_values, jet_values)
def test_mul_associates_to_working_precision(a, b, c):
    p = Precision(60)
    ja, jb, jc = (jet_from(v, p) for v in (a, b, c))
    left, right = (ja * jb) * jc, ja * (jb * jc)
    scale = max(1, *(abs(x) for x in a), *(abs(x) for x in b), *(abs(x) for x in c)) ** 3
    for x, y in zip(left, right):
        assert abs(x - y) <= scale * p.floor(5)


def test_jet_requires_five_coefficients(p60):
    with pytest.raises(ValueError):
        Jet4((p60.real(1),))
