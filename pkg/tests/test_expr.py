from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import randgen as rg
from ckpde import expr as ex
from ckpde import ratfunc
from ckpde.errors import IndexRangeError, InadmissibleValueError, ParseError
from ckpde.series import TruncatedSeries

DIMS = {"n": 3, "k": 1, "m": 3}


def same_function(a, b):
    return ratfunc.from_expression(ex.sub(a, b)).is_zero()


def test_parse_sum_and_product():
    e = ex.parse("x[1] + 2*p[1]", DIMS)
    assert e == ex.Add(ex.x(1), ex.Mul(ex.const(2), ex.p(1)))


def test_parse_quotient_of_reduced_rhs():
    e = ex.parse("(pd[2][1]*pd[3][1] )/ pd[1][1]", DIMS)
    assert e == ex.Div(ex.Mul(ex.pd(2, 1), ex.pd(3, 1)), ex.pd(1, 1))


def test_parse_rejects_tangential_index_out_of_range():
    with pytest.raises(IndexRangeError):
        ex.parse("pd[1][2]", DIMS)


@pytest.mark.parametrize("text", ["x[1] +", "2.5*x[1]", "foo(x[1])", "x[1]^(-1)", "1/0", "x[1] )", "t"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        ex.parse(text, DIMS)


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as info:
        ex.parse("x[1] + $", DIMS)
    assert info.value.position == 7


def test_t_only_where_allowed():
    assert ex.parse("x[1]*t", DIMS, allow_t=True) == ex.Mul(ex.x(1), ex.T)


def test_quotient_rule():
    e = ex.parse("pd[2][1]/pd[1][1]", DIMS)
    d = ex.differentiate(e, ex.pd(2, 1))
    assert same_function(d, ex.parse("1/pd[1][1]", DIMS))


def test_quotient_rule_against_closed_form():
    e = ex.parse("(pd[2][1]*pd[3][1])/pd[1][1]", DIMS)
    d = ex.differentiate(e, ex.pd(1, 1))
    assert same_function(d, ex.parse("-pd[2][1]*pd[3][1]/pd[1][1]^2", DIMS))


def test_derivative_of_unrelated_variable_is_zero():
    assert ex.differentiate(ex.p(1), ex.x(1)) == ex.ZERO


def test_evaluate_product():
    x1 = TruncatedSeries.variable(0, 2, 4)
    s = ex.evaluate(ex.parse("p[1]*pd[1][1]", DIMS), {ex.p(1): x1, ex.pd(1, 1): Fraction(1)})
    assert s == x1


def test_evaluate_geometric_series():
    x2 = TruncatedSeries.variable(1, 2, 3)
    s = ex.evaluate(ex.parse("1/pd[1][1]", DIMS), {ex.pd(1, 1): 1 - x2}, order=3)
    assert s == 1 + x2 + x2 * x2 + x2 * x2 * x2


def test_evaluate_rejects_zero_denominator():
    zero = TruncatedSeries.zero(2, 3)
    with pytest.raises(InadmissibleValueError):
        ex.evaluate(ex.parse("pd[2][1]/pd[1][1]", DIMS), {ex.pd(2, 1): zero, ex.pd(1, 1): zero})


def test_primitive_needs_rational_value():
    with pytest.raises(InadmissibleValueError):
        ex.evaluate_point(ex.parse("sqrt(x[1])", DIMS), {ex.x(1): Fraction(2)})
    assert ex.evaluate_point(ex.parse("sqrt(x[1])", DIMS), {ex.x(1): Fraction(9, 4)}) == Fraction(3, 2)
    assert ex.evaluate_point(ex.parse("exp(x[1]) + cos(x[1])", DIMS), {ex.x(1): Fraction(0)}) == 2


def test_printer_round_trip_of_negated_product():
    e = ex.mul(ex.const(-1), ex.mul(ex.power(ex.neg(ex.pd(1, 1)), 3), ex.call("exp", ex.x(1))))
    assert ex.parse(ex.to_text(e), DIMS) == e


def test_substitute():
    e = ex.parse("x[1]*t", DIMS, allow_t=True)
    assert ex.substitute(e, {ex.T: ex.pd(1, 1)}) == ex.Mul(ex.x(1), ex.pd(1, 1))


@given(st.integers(0, 10 ** 6))
def test_chain_rule(seed):
    """d/ds evaluate(e, env(s)) = sum_v evaluate(de/dv) * d env(v)/ds."""
    rng = rg.rng_for("chain", seed)
    variables = [ex.x(1), ex.p(1), ex.pd(2, 1)]
    e = rg.expression(rng, variables, depth=3)
    order = 5
    env = {}
    for v in variables:
        env[v] = rg.series(rng, 1, order, terms=3, constant=rg.nonzero_rational(rng, 1, 3))
    try:
        lhs = ex.evaluate(e, env, 1, order).derivative(0)
    except InadmissibleValueError:
        return
    rhs = TruncatedSeries.zero(1, order - 1)
    for v in variables:
        rhs = rhs + ex.evaluate(ex.differentiate(e, v), env, 1, order) * env[v].derivative(0)
    assert lhs.agrees_with(rhs, order - 1)


@given(st.integers(0, 10 ** 6))
def test_point_value_is_constant_term(seed):
    rng = rg.rng_for("point", seed)
    variables = [ex.x(1), ex.x(2), ex.p(3)]
    e = rg.expression(rng, variables, depth=3, primitives=False)
    env_point = {v: rg.rational(rng) for v in variables}
    env = {v: TruncatedSeries.variable(i, 3, 3) + c for i, (v, c) in enumerate(env_point.items())}
    try:
        value = ex.evaluate_point(e, env_point)
    except (InadmissibleValueError, ZeroDivisionError):
        return
    assert ex.evaluate(e, env, 3, 3).constant_term == value


@given(st.integers(0, 10 ** 6))
def test_primitive_series_match_symbolic_derivative(seed):
    """Series of the derivative equals the derivative of the series, per primitive."""
    rng = rg.rng_for("primitive", seed)
    name = rng.choice(sorted(ex.PRIMITIVES))
    base = {"log": Fraction(1), "sqrt": Fraction(rng.choice([1, 4, 9]), rng.choice([1, 4]))}.get(name, Fraction(0))
    t = TruncatedSeries.variable(0, 1, 6) + base
    e = ex.call(name, ex.x(1))
    lhs = ex.evaluate(e, {ex.x(1): t}, 1, 6).derivative(0)
    rhs = ex.evaluate(ex.differentiate(e, ex.x(1)), {ex.x(1): t}, 1, 6)
    assert lhs.agrees_with(rhs, 5)
