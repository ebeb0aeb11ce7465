from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import randgen as rg
from ckpde import cauchy, compat
from ckpde import expr as ex
from ckpde import mongeampere as ma
from ckpde.errors import GuardViolationError, IncompatibilityError, SchemaError
from ckpde.series import TruncatedSeries


def xs(n, order=8):
    return [TruncatedSeries.variable(i, n, order) for i in range(n)]


def uni(coeffs, order=8):
    return TruncatedSeries.univariate(coeffs, order)


HALF = Fraction(1, 2)


def test_minors_of_simple_quadratics():
    x1, x2, x3 = xs(3)
    assert all(ma.delta_minor((x1 * x1).scale(HALF), a, b).is_zero() for a in (2, 3) for b in (2, 3))
    u = (x1 * x1 + x2 * x2).scale(HALF)
    assert ma.delta_minor(u, 2, 2) == TruncatedSeries.constant(1, 3, 6)
    assert ma.delta_minor(x1 * x2, 2, 2) == TruncatedSeries.constant(-1, 3, 6)


def test_minor_symmetry():
    x1, x2, x3 = xs(3)
    u = x1 * x1 + x1 * x2 * x3 + x3 ** 3 + x2 * x2 * x1
    assert ma.delta_minor(u, 2, 3) == ma.delta_minor(u, 3, 2)


def test_rank_profile():
    x1, x2, x3 = xs(3)
    assert ma.hessian_rank_profile(((x1 + x2) * (x1 + x2)).scale(HALF)).rank_one
    prof = ma.hessian_rank_profile((x1 * x1 + x2 * x2).scale(HALF))
    assert not prof.rank_one and prof.witness[:2] == (2, 2) and prof.witness[3] == 1
    t = TruncatedSeries.variable(0, 1, 8)
    cyl = (-(t.cos().log())).embed(3, [0])
    assert ma.hessian_rank_profile(cyl).rank_one
    with pytest.raises(GuardViolationError):
        ma.hessian_rank_profile(x1 * x2)


def test_potential_is_reconstructed():
    rep = ma.classify_rhs(ma.MongeRhs(3, {(2, 3): "t"}))
    assert rep.verdict == "admissible"
    x1, x2, x3 = xs(3)
    assert rep.potential == x2 * x3
    assert rep.g[2, 3] == ex.ONE and rep.g[2, 2] == ex.ZERO


def test_constant_rhs_is_rejected():
    rep = ma.classify_rhs(ma.MongeRhs(3, {(2, 2): "1"}))
    assert rep.summary() == "inadmissible: t-independent nonzero f"


def test_x1_dependence_is_rejected():
    rep = ma.classify_rhs(ma.MongeRhs(3, {(2, 2): "x[1]*t"}))
    assert rep.summary() == "inadmissible: d/dx[1] g_22 = 1 (must vanish)"


def test_nonlinear_t_dependence_is_rejected():
    rep = ma.classify_rhs(ma.MongeRhs(3, {(2, 2): "t^2"}))
    assert rep.verdict == "inadmissible" and rep.witnesses[0].kind == "not_linear_in_t"


def test_g_must_be_a_hessian():
    # g_22 = x3 gives d_3 g_22 = 1 but d_2 g_23 = 0
    rep = ma.classify_rhs(ma.MongeRhs(3, {(2, 2): "x[3]*t"}))
    assert rep.verdict == "inadmissible"


def test_transcendental_rhs_uses_germ_test():
    rep = ma.classify_rhs(ma.MongeRhs(3, {(2, 2): "exp(x[2])*t"}))
    assert rep.verdict == "admissible"
    rep = ma.classify_rhs(ma.MongeRhs(3, {(2, 2): "exp(x[1])*t"}))
    assert rep.verdict == "inadmissible"


def test_n2_is_undecided():
    rep = ma.classify_rhs(ma.MongeRhs(2, {(2, 2): "1"}))
    assert rep.verdict == "undecided" and rep.admissible is None


def test_symmetry_required():
    with pytest.raises(SchemaError):
        ma.MongeRhs(3, {(2, 3): "t", (3, 2): "2*t"})
    with pytest.raises(SchemaError):
        ma.MongeRhs(3, {(2, 2): "p[1]"})
    with pytest.raises(SchemaError):
        ma.MongeRhs.from_json({"n": 3, "f": [{"alpha": 2, "beta": 3, "expr": "t"},
                                             {"alpha": 3, "beta": 2, "expr": "x[1]"}]})


def test_rhs_json_round_trip():
    rhs = ma.MongeRhs(4, {(2, 3): "x[4]*t", (4, 4): "t"}, x0=["1/3", 0, 0, 0])
    again = ma.MongeRhs.from_json(rhs.to_json())
    assert again.to_json() == rhs.to_json() and again.f[3, 2] == again.f[2, 3]


def test_reduction_with_zero_rhs():
    sysm, quad = ma.reduce_to_first_order(ma.MongeRhs.zero(3))
    assert sysm.F[2, 3] == ex.parse("pd[2][1]*pd[3][1]/pd[1][1]", {"n": 3, "k": 1, "m": 3})
    assert sysm.F[1, 2] == ex.pd(2, 1)
    assert sysm.m == 3 and sysm.k == 1 and sysm.guards == (ex.pd(1, 1),)
    assert quad.describe()["component"] == 4


def test_reduction_with_t():
    sysm, _ = ma.reduce_to_first_order(ma.MongeRhs(3, {(2, 2): "t"}))
    env = {ex.pd(1, 1): Fraction(2), ex.pd(2, 1): Fraction(3)}
    assert ex.evaluate_point(sysm.F[2, 2], env) == Fraction(9, 2) + 1


def test_cylinder():
    sol = ma.solve_full(ma.MongeRhs.zero(3), uni([0, 0, HALF]), [uni([0], 7), uni([0], 7)])
    x1, _, _ = xs(3)
    assert sol.u == (x1 * x1).scale(HALF)


def test_tilted_cylinder():
    sol = ma.solve_full(ma.MongeRhs.zero(3), uni([0, 0, HALF]), [uni([0, 1], 7), uni([0], 7)])
    x1, x2, _ = xs(3)
    assert sol.u == ((x1 + x2) * (x1 + x2)).scale(HALF)


def test_moment_data_rank_one():
    sol = ma.solve_full(ma.MongeRhs.zero(3), uni([0, 0, HALF], 6),
                        [uni([0, 0, HALF], 5), uni([0, 0, 0, Fraction(1, 6)], 5)], order=6)
    assert ma.hessian_rank_profile(sol.u).rank_one
    assert sol.u.derivative(0).derivative(0).agrees_with(sol.gradient[0].derivative(0), 4)


def test_solve_full_guards():
    with pytest.raises(GuardViolationError):
        ma.solve_full(ma.MongeRhs.zero(3), uni([0, 0, 0, 1]), [uni([0], 7), uni([0], 7)])
    with pytest.raises(IncompatibilityError):
        ma.solve_full(ma.MongeRhs(3, {(2, 2): "1"}), uni([0, 0, HALF]), [uni([0], 7), uni([0], 7)])
    with pytest.raises(SchemaError):
        ma.solve_full(ma.MongeRhs.zero(3), uni([0, 0, HALF]), [uni([0], 7)])


def test_n2_plain_solve():
    sol = ma.solve_full(ma.MongeRhs(2, {(2, 2): "1"}), uni([0, 0, 1]), [uni([0, 0, 1], 7)])
    assert (ma.delta_minor(sol.u, 2, 2) - TruncatedSeries.constant(1, 2, 6)).is_zero()


def test_gradient_solves_first_order_system():
    rhs = ma.MongeRhs(3, {(2, 3): "t", (2, 2): "t"})
    sol = ma.solve_full(rhs, uni([0, 1, 1, 2], 6), [uni([1, 0, 1], 5), uni([0, 2], 5)], order=6)
    data = cauchy.CauchyData(tuple([uni([0, 1, 1, 2], 6).derivative(0)] + [uni([1, 0, 1], 5), uni([0, 2], 5)]))
    eq, mismatch = cauchy.residual(sol.system, sol.gradient, data)
    assert cauchy.is_clean(eq, mismatch)
    u11 = sol.u.derivative(0).derivative(0)
    assert u11.agrees_with(sol.gradient[0].derivative(0), 4)


@given(st.integers(0, 10 ** 6))
def test_closed_forms_match_generic_tensors(seed):
    rng = rg.rng_for("closed", seed)
    n = rng.choice([3, 4])
    g = {}
    for a in range(2, n + 1):
        for b in range(a, n + 1):
            g[a, b] = g[b, a] = rg.polynomial(rng, [ex.x(i) for i in range(1, n + 1)])
    rhs = ma.MongeRhs.from_potential_hessian(n, g)
    sysm, _ = ma.reduce_to_first_order(rhs)
    pt = ([rg.rational(rng) for _ in range(n)], [rg.rational(rng) for _ in range(n)],
          [[rg.nonzero_rational(rng)]] + [[rg.rational(rng)] for _ in range(n - 1)])
    assert compat.phi_psi(sysm, pt) == ma.closed_form_phi_psi(rhs, g, pt)


@given(st.integers(0, 10 ** 6))
def test_inadmissible_g_form_blocks_the_jet(seed):
    """An inadmissible g*t has some base point without an approximate jet."""
    rng = rg.rng_for("blocked", seed)
    rhs = ma.MongeRhs(3, {(2, 2): "x[1]*t"})
    sysm, _ = ma.reduce_to_first_order(rhs)
    blocked = 0
    for _ in range(8):
        pp = [[rg.nonzero_rational(rng)], [rg.rational(rng)], [rg.rational(rng)]]
        here = sysm.with_base_point([rg.rational(rng) for _ in range(3)], [rg.rational(rng) for _ in range(3)], pp)
        blocked += not cauchy.approximately_solvable(here)
    assert blocked > 0
