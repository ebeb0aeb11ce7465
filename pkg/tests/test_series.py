from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import randgen as rg
from ckpde.errors import ArityMismatchError, InadmissibleValueError
from ckpde.series import (
    TruncatedSeries,
    calculus,
    combine,
    series_from_json,
    series_to_json,
    unary_analytic,
)


def var(i, arity=2, order=4):
    return TruncatedSeries.variable(i, arity, order)


def uni(coeffs, order):
    return TruncatedSeries.univariate(coeffs, order)


def test_difference_of_squares():
    x = var(0, 1)
    assert combine("mul", 1 + x, 1 - x) == 1 - x * x


def test_add_variables():
    s = combine("add", var(0), var(1))
    assert s.coeff((1, 0)) == 1 and s.coeff((0, 1)) == 1 and len(s.terms()) == 2


def test_cauchy_product_truncates():
    s = uni([1, 1, 1], 2)
    assert combine("mul", s, s) == uni([1, 2, 3], 2)


def test_reciprocal_geometric():
    assert unary_analytic("reciprocal", uni([1, -1], 3)) == uni([1, 1, 1, 1], 3)


def test_sqrt_small_example():
    r = unary_analytic("sqrt", uni([1, 2], 2))
    assert r == uni([1, 1, Fraction(-1, 2)], 2)
    assert r * r == uni([1, 2], 2)


def test_reciprocal_of_nonunit_fails():
    with pytest.raises(InadmissibleValueError):
        unary_analytic("reciprocal", var(0, 1))


def test_sqrt_needs_rational_root():
    with pytest.raises(InadmissibleValueError):
        uni([2, 1], 3).sqrt()


def test_derivative_of_monomial():
    s = TruncatedSeries.monomial((2, 1), 1, 5)
    assert calculus("derivative", s, 0) == TruncatedSeries.monomial((1, 1), 2, 4)


def test_tan_antiderivative_is_log_cos():
    tan = uni([0, 1, 0, Fraction(1, 3), 0, Fraction(2, 15)], 6)
    a = calculus("antiderivative", tan, 0)
    assert a.truncate(6) == uni([0, 0, Fraction(1, 2), 0, Fraction(1, 12), 0, Fraction(1, 45)], 6)
    t = var(0, 1, 6)
    assert a.truncate(6) == t.cos().reciprocal().log()
    assert a.derivative(0).truncate(5) == tan.truncate(5)


def test_derivative_of_constant():
    assert calculus("derivative", TruncatedSeries.constant(5, 2, 3), 0).is_zero()


def test_arity_mismatch():
    with pytest.raises(ArityMismatchError):
        combine("add", var(0, 1), var(0, 2))


def test_order_is_minimum():
    assert (var(0, 1, 3) * var(0, 1, 5)).order == 3


def test_no_zero_coefficients_stored():
    s = var(0) - var(0)
    assert s.terms() == {} and s.is_zero()


def test_exp_log_inverse():
    s = uni([1, 2, -1, 3], 5)
    assert s.log().exp() == s


def test_sin_cos_pythagoras():
    t = var(0, 1, 9)
    assert t.sin() * t.sin() + t.cos() * t.cos() == TruncatedSeries.constant(1, 1, 9)


def test_compose_and_linear_substitute():
    x, y = var(0), var(1)
    s = x * x + y
    assert s.compose([x + y, x]) == (x + y) * (x + y) + x
    assert s.linear_substitute([[1, 1], [1, 0]], 2) == (x + y) * (x + y) + x


def test_restrict_keeps_listed_variables():
    x, y = var(0), var(1)
    s = x * y + x * x + 3
    assert s.restrict([0]) == TruncatedSeries.univariate([3, 0, 1], 4)


def test_json_round_trip():
    s = TruncatedSeries(2, 4, {(1, 0): Fraction(3, 5), (0, 2): -2})
    assert series_from_json(series_to_json(s)) == s
    with pytest.raises(ValueError):
        series_from_json({"arity": 1})


def test_lowest_term_and_derivative_at_zero():
    s = TruncatedSeries(2, 4, {(2, 1): 3, (0, 2): 1})
    assert s.lowest_term() == ((0, 2), 1)
    assert s.derivative_at_zero((2, 1)) == 6


@given(st.integers(0, 10 ** 6))
def test_distributivity(seed):
    rng = rg.rng_for("dist", seed)
    a, b, c = (rg.series(rng, 2, 4) for _ in range(3))
    assert a * (b - c) == a * b - a * c


@given(st.integers(0, 10 ** 6))
def test_antiderivative_inverts_derivative(seed):
    rng = rg.rng_for("anti", seed)
    s = rg.series(rng, 2, 5)
    assert s.antiderivative(1).derivative(1).agrees_with(s, 5)


@given(st.integers(0, 10 ** 6))
def test_truncation_commutes_with_product(seed):
    rng = rg.rng_for("trunc", seed)
    a, b = rg.series(rng, 2, 6), rg.series(rng, 2, 6)
    assert (a * b).truncate(3) == a.truncate(3) * b.truncate(3)
