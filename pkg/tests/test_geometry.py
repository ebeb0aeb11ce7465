from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import randgen as rg
from ckpde import geometry
from ckpde import mongeampere as ma
from ckpde.errors import SchemaError
from ckpde.series import TruncatedSeries

N = 8


def t(order=N):
    return TruncatedSeries.variable(0, 1, order)


def uni(coeffs, order=N):
    return TruncatedSeries.univariate(coeffs, order)


def test_projection_of_south_pole():
    assert geometry.stereographic([0, 0]) == (0, 0)


def test_projection_examples():
    assert geometry.stereographic([Fraction(3, 5), 0]) == (Fraction(3, 4), 0)
    assert geometry.stereographic([Fraction(3, 4), 0], "inverse") == (Fraction(3, 5), 0, Fraction(-4, 5))


def test_projection_irrational_root():
    pt = geometry.stereographic([Fraction(1, 2)])
    assert isinstance(pt, geometry.ScaledPoint) and pt.radicand == Fraction(3, 4)
    assert abs(pt.approx()[0] - 0.5 / 0.75 ** 0.5) < 1e-12


def test_projection_domain():
    with pytest.raises(ValueError):
        geometry.stereographic([1, 0])
    with pytest.raises(ValueError):
        geometry.stereographic([0], "sideways")


@given(st.integers(0, 10 ** 6))
def test_projection_round_trip(seed):
    rng = rg.rng_for("proj", seed)
    # Pythagorean points y with 1 + |y|^2 a square
    m, k = rng.randint(1, 9), rng.randint(1, 9)
    y = (Fraction(2 * m * k, m * m - k * k),) if m != k else (Fraction(0),)
    back = geometry.stereographic(y, "inverse")
    if isinstance(back, geometry.ScaledPoint):
        return
    assert geometry.stereographic(back[:-1]) == y


def test_great_circle_data():
    d = geometry.curve_to_cauchy_data(geometry.SphereCurve.great_circle(3, N))
    assert d.phi == t().sin() * t().cos().reciprocal()
    assert d.a.truncate(N) == -(t().cos().log())
    assert all(s.is_zero() for s in d.a_normal)


def test_moment_curve_data():
    d = geometry.curve_to_cauchy_data(geometry.SphereCurve.moment(3, N))
    half, sixth = Fraction(1, 2), Fraction(1, 6)
    assert d.Gamma == [t(), uni([0, 0, half]), uni([0, 0, 0, sixth])]
    assert d.a.truncate(N) == uni([0, 0, half])
    assert d.a_normal == [uni([0, 0, half]), uni([0, 0, 0, sixth])]


@pytest.mark.parametrize("curve", [geometry.SphereCurve.great_circle(3, N), geometry.SphereCurve.moment(3, N),
                                   geometry.SphereCurve.moment(2, N)])
def test_data_normalizations(curve):
    d = geometry.curve_to_cauchy_data(curve)
    assert [d.a.derivative_at_zero([j]) for j in range(3)] == [0, 0, 1]


def test_renormalize_round_trip():
    curve = geometry.SphereCurve.moment(3, N)
    again = geometry.renormalize(geometry.curve_to_cauchy_data(curve).Gamma)
    assert all(g.agrees_with(h, N - 1) for g, h in zip(curve.gamma, again.gamma))


def test_curve_invariants():
    zero = TruncatedSeries.zero(1, N)
    one = TruncatedSeries.constant(1, 1, N)
    with pytest.raises(SchemaError):
        geometry.SphereCurve((t(), zero, -one))
    with pytest.raises(SchemaError):
        geometry.SphereCurve((zero, zero, one))
    with pytest.raises(SchemaError):
        geometry.SphereCurve((zero, t().sin(), -t().cos()))


def test_curve_json_forms():
    curve = geometry.SphereCurve.moment(3, 6)
    assert geometry.SphereCurve.from_json(curve.to_json()) == curve
    doc = {"form": "unnormalized", "v": [{"arity": 1, "order": 6, "terms": [{"exp": [1], "num": "1"}]},
                                         {"arity": 1, "order": 6, "terms": []}]}
    assert geometry.SphereCurve.from_json(doc).n == 2
    with pytest.raises(SchemaError):
        geometry.SphereCurve.from_json({"n": 4, "gamma": curve.to_json()["gamma"]})


def test_great_circle_cylinder():
    model = geometry.construct_from_curve(geometry.SphereCurve.great_circle(3, N))
    assert model.u == (-(t().cos().log())).embed(3, [0])
    rep = geometry.nondegeneracy_analysis(model)
    assert set(rep.span_dims[1:]) == {1}
    assert rep.contained and rep.l is None
    assert rep.levi_verdict.startswith("degenerate")


def test_moment_model():
    model = geometry.construct_from_curve(geometry.SphereCurve.moment(3, N))
    u = model.u
    assert u.constant_term == 0 and u.derivative_at_zero([1, 0, 0]) == 0
    assert u.derivative_at_zero([2, 0, 0]) == 1
    assert geometry.gauss_identity_holds(u, model.Gamma, N - 1)
    rep = geometry.nondegeneracy_analysis(model)
    assert rep.span_dims[:4] == [0, 1, 2, 3]
    assert rep.summary() == "l = 3 at 0; Levi number verdict: n"
    assert rep.levi_form_rank == 1 and rep.reduced_dims == rep.span_dims


def test_plane_tube_example():
    half = Fraction(1, 2)
    a, a2 = uni([0, 0, half]), uni([0, 0, half], N - 1)
    dims, l = geometry.data_nondegeneracy(a, [a2], 3)
    assert geometry.data_vectors(a, [a2], 3)[1:] == [[1, 0], [0, 1]]
    assert dims == [0, 1, 2] and l == 3
    u = ma.solve_full(ma.MongeRhs.zero(2), a, [a2], N).u
    rep = geometry.nondegeneracy_analysis(u)
    assert rep.l == 2 and rep.levi_verdict == "n"


def test_hyperplane_iff_no_full_span():
    models = [geometry.construct_from_curve(c) for c in
              (geometry.SphereCurve.great_circle(3, N), geometry.SphereCurve.moment(3, N),
               geometry.SphereCurve.moment(2, N), geometry.SphereCurve.moment(4, N))]
    for model in models:
        rep = geometry.nondegeneracy_analysis(model)
        assert rep.contained == (rep.l is None)


def test_non_rank_one_graph():
    x1, x2 = (TruncatedSeries.variable(i, 2, 5) for i in range(2))
    u = (x1 * x1 + x2 * x2).scale(Fraction(1, 2))
    rep = geometry.nondegeneracy_analysis(u)
    assert not rep.rank_one and rep.reduced_dims is None
    assert rep.l == 1 and rep.levi_form_rank == 2


def test_j_max_bound():
    model = geometry.construct_from_curve(geometry.SphereCurve.moment(3, 6))
    with pytest.raises(ValueError):
        geometry.nondegeneracy_analysis(model, 6)


def test_construction_needs_enough_order():
    with pytest.raises(SchemaError):
        geometry.construct_from_curve(geometry.SphereCurve.moment(3, 5), 8)
