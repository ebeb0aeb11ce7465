"""Rank-one Monge-Ampere systems ``Delta_{ab}(u) = f_{ab}(x, u_11)``.

The second-order problem is reduced to a first-order system for the gradient
``u^i = u_i`` (one tangential direction ``x^1``), solved with
:func:`ckpde.cauchy.solve`, and ``u`` is recovered by quadrature along the
normal directions.  Indices alpha, beta run over 2..n.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import cauchy, ratfunc
from . import expr as ex
from .errors import (
    GuardViolationError,
    IncompatibilityError,
    InadmissibleValueError,
    NotRationalError,
    ResidualError,
    SchemaError,
)
from .series import TruncatedSeries, as_rational
from .system import SystemSpec


@dataclass(frozen=True, eq=False)
class MongeRhs:
    """Right-hand sides f_{ab}(x, t) for 2 <= a, b <= n, where t stands for u_11."""

    n: int
    f: Mapping
    x0: tuple = ()

    def __post_init__(self):
        n = self.n
        if not isinstance(n, int) or n < 2:
            raise SchemaError("Monge-Ampere systems need n >= 2")
        dims = {"n": n, "k": 1, "m": 1}
        f = {}
        for (a, b), e in dict(self.f).items():
            if not (2 <= a <= n and 2 <= b <= n):
                raise SchemaError(f"f index ({a}, {b}) outside 2..{n}")
            if isinstance(e, str):
                e = ex.parse(e, dims, allow_t=True)
            ex.check_bounds(e, dims, allow_t=True)
            bad = [v for v in ex.variables(e) if v.kind not in ("x", "t")]
            if bad:
                raise SchemaError(f"f_{a}{b} may only use x[i] and t")
            if (b, a) in f and f[b, a] != e:
                raise SchemaError(f"f is not symmetric: f_{a}{b} != f_{b}{a}")
            f[a, b] = e
        for a in range(2, n + 1):
            for b in range(2, n + 1):
                if (a, b) in f and (b, a) not in f:
                    f[b, a] = f[a, b]
                f.setdefault((a, b), ex.ZERO)
        object.__setattr__(self, "f", f)
        x0 = tuple(as_rational(Fraction(v) if isinstance(v, str) else v) for v in (self.x0 or [0] * n))
        if len(x0) != n:
            raise SchemaError(f"x0 must have {n} entries")
        object.__setattr__(self, "x0", x0)

    @property
    def normal(self):
        return range(2, self.n + 1)

    def pairs(self):
        return [(a, b) for a in self.normal for b in self.normal if a <= b]

    def is_rational(self) -> bool:
        return all(ex.is_rational(e) for e in self.f.values())

    @classmethod
    def zero(cls, n, x0=()):
        return cls(n, {}, x0)

    @classmethod
    def from_potential_hessian(cls, n, g: Mapping, x0=()):
        """f_{ab} = g_{ab} t."""
        f = {}
        for key, e in g.items():
            if isinstance(e, str):
                e = ex.parse(e, {"n": n, "k": 1, "m": 1})
            f[key] = ex.mul(e, ex.T)
        return cls(n, f, x0)

    def to_json(self) -> dict:
        return {"n": self.n, "x0": [str(v) for v in self.x0],
                "f": [{"alpha": a, "beta": b, "expr": ex.to_text(self.f[a, b])}
                      for a, b in self.pairs() if not ex.is_const(self.f[a, b], 0)]}

    @classmethod
    def from_json(cls, doc: Mapping) -> MongeRhs:
        if not isinstance(doc, Mapping):
            raise SchemaError("Monge right-hand side must be a JSON object")
        try:
            n = int(doc["n"])
            items = doc.get("f", [])
            f = {}
            for item in items:
                a, b = int(item["alpha"]), int(item["beta"])
                e = ex.parse(item["expr"], {"n": n, "k": 1, "m": 1}, allow_t=True)
                if (a, b) in f and f[a, b] != e:
                    raise SchemaError(f"conflicting entries for f_{a}{b}")
                if (b, a) in f and f[b, a] != e:
                    raise SchemaError(f"f is not symmetric: f_{a}{b} != f_{b}{a}")
                f[a, b] = e
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"Monge document needs n and entries alpha, beta, expr ({exc})") from exc
        return cls(n, f, tuple(doc.get("x0", ())))


# ---------------------------------------------------------------------- minors
def delta_minor(u: TruncatedSeries, a: int, b: int) -> TruncatedSeries:
    """u_11 u_ab - u_1b u_a1, to order N - 2."""
    if u.order < 2:
        raise ValueError("delta_minor needs a series of order at least 2")
    if not (2 <= a <= u.arity and 2 <= b <= u.arity):
        raise IndexError(f"minor indices must lie in 2..{u.arity}")
    d = lambda i, j: u.derivative(i - 1).derivative(j - 1)
    return (d(1, 1) * d(a, b) - d(1, b) * d(a, 1)).truncate(u.order - 2)


@dataclass
class RankProfile:
    rank_one: bool
    witness: tuple | None = None  # (a, b, exponent, value)

    def summary(self) -> str:
        if self.rank_one:
            return "rank = 1 (all minors vanish to truncation order)"
        a, b, exp, val = self.witness
        return f"rank > 1: Delta_{a}{b} has coefficient {val} at {list(exp)}"


def hessian_rank_profile(u: TruncatedSeries) -> RankProfile:
    """Rank-one test through the minors; requires u_11(0) != 0."""
    if u.derivative_at_zero([2] + [0] * (u.arity - 1)) == 0:
        raise GuardViolationError("u_11(0) = 0: the minor criterion does not apply",
                                  guard="u_11(0) != 0")
    for a in range(2, u.arity + 1):
        for b in range(a, u.arity + 1):
            m = delta_minor(u, a, b)
            if not m.is_zero():
                exp, val = m.lowest_term()
                return RankProfile(False, (a, b, exp, val))
    return RankProfile(True)


# ---------------------------------------------------------------------- classification
@dataclass
class MongeWitness:
    kind: str
    pair: tuple
    value: str
    detail: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind, "pair": list(self.pair), "value": self.value, "detail": self.detail}


@dataclass
class MongeReport:
    verdict: str  # admissible | inadmissible | undecided
    n: int
    witnesses: list = field(default_factory=list)
    g: dict | None = None
    potential: TruncatedSeries | None = None
    method: str = ""

    @property
    def admissible(self):
        return {"admissible": True, "inadmissible": False}.get(self.verdict)

    def summary(self) -> str:
        if self.verdict == "undecided":
            return "undecided: n = 2, every f is solvable and no condition is drawn"
        if self.verdict == "admissible":
            text = "admissible: f = g*t with g the Hessian of a potential"
            if self.potential is not None:
                text += f"; v = {self.potential.format(_xnames(self.n))}"
            return text
        w = self.witnesses[0]
        if w.kind == "t_independent_nonzero":
            return "inadmissible: t-independent nonzero f"
        if w.kind == "not_linear_in_t":
            return f"inadmissible: f_{w.pair[0]}{w.pair[1]} is not of the form g*t"
        return f"inadmissible: {w.detail} = {w.value} (must vanish)"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "summary": self.summary(),
            "method": self.method,
            "witnesses": [w.to_json() for w in self.witnesses],
            "g": None if self.g is None else {f"{a},{b}": ex.to_text(e) for (a, b), e in sorted(self.g.items())},
            "potential": None if self.potential is None else {
                "arity": self.potential.arity, "order": self.potential.order,
                "text": self.potential.format(_xnames(self.n))},
        }


def _xnames(n):
    return [f"x{i}" for i in range(1, n + 1)]


class _ZeroTest:
    """Identity test: rational functions exactly, otherwise a germ at (x0, t0 = 1)."""

    def __init__(self, rhs: MongeRhs, order: int):
        self.rational = rhs.is_rational()
        self.memo = {}
        n = rhs.n
        self.order = order
        self.env = {ex.x(i): TruncatedSeries.variable(i - 1, n + 1, order) + rhs.x0[i - 1]
                    for i in range(1, n + 1)}
        self.env[ex.T] = TruncatedSeries.variable(n, n + 1, order) + 1
        self.cache = {}
        self.arity = n + 1

    def zero(self, e: ex.Expression) -> bool:
        if self.rational:
            try:
                return ratfunc.from_expression(e, self.memo).is_zero()
            except NotRationalError:
                pass
        try:
            s = ex.evaluate(e, self.env, self.arity, self.order, self.cache)
        except InadmissibleValueError as exc:
            raise GuardViolationError(f"cannot expand f at (x0, t = 1): {exc}") from exc
        return s.is_zero()

    def show(self, e: ex.Expression) -> str:
        if self.rational:
            try:
                return str(ratfunc.from_expression(e, self.memo))
            except NotRationalError:
                pass
        return ex.to_text(e)


def classify_rhs(rhs: MongeRhs, order: int = 8, germ_order: int | None = None) -> MongeReport:
    """Decide whether every f_ab = g_ab(x) t with g the Hessian of a potential in x^2..x^n."""
    n = rhs.n
    if n == 2:
        return MongeReport("undecided", n, method="n = 2")
    test = _ZeroTest(rhs, 2 * order if germ_order is None else germ_order)
    method = "rational identity" if rhs.is_rational() else "germ-at-base-point"
    witnesses, g = [], {}
    for a, b in rhs.pairs():
        f = rhs.f[a, b]
        gt = ex.differentiate(f, ex.T)
        if test.zero(gt):
            if not test.zero(f):
                witnesses.append(MongeWitness("t_independent_nonzero", (a, b), test.show(f),
                                              f"f_{a}{b} does not depend on t"))
            g[a, b] = ex.ZERO
            continue
        if not (test.zero(ex.differentiate(gt, ex.T)) and test.zero(ex.sub(f, ex.mul(ex.T, gt)))):
            witnesses.append(MongeWitness("not_linear_in_t", (a, b), test.show(f),
                                          f"f_{a}{b} - t*d/dt f_{a}{b}"))
            continue
        g[a, b] = gt
    if witnesses:
        return MongeReport("inadmissible", n, witnesses, method=method)
    for a, b in list(g):
        g[b, a] = g[a, b]
    for a, b in rhs.pairs():
        d1 = ex.differentiate(g[a, b], ex.x(1))
        if not test.zero(d1):
            witnesses.append(MongeWitness("depends_on_x1", (a, b), test.show(d1),
                                          f"d/dx[1] g_{a}{b}"))
    for a in rhs.normal:
        for b in rhs.normal:
            for c in rhs.normal:
                if b < c:
                    d = ex.sub(ex.differentiate(g[a, b], ex.x(c)), ex.differentiate(g[a, c], ex.x(b)))
                    if not test.zero(d):
                        witnesses.append(MongeWitness(
                            "not_closed", (a, b, c), test.show(d),
                            f"d/dx[{c}] g_{a}{b} - d/dx[{b}] g_{a}{c}"))
    if witnesses:
        return MongeReport("inadmissible", n, witnesses, g, method=method)
    return MongeReport("admissible", n, [], g, potential(rhs, g, order), method=method)


def potential(rhs: MongeRhs, g: Mapping, order: int) -> TruncatedSeries:
    """Series v in x^2..x^n (centred at x0) with d_a d_b v = g_ab, integration constants zero."""
    n = rhs.n
    env = {ex.x(i): TruncatedSeries.variable(i - 1, n, order) + rhs.x0[i - 1] for i in range(1, n + 1)}
    cache = {}
    try:
        gs = {key: ex.evaluate(e, env, n, max(order - 2, 0), cache) for key, e in g.items()}
    except InadmissibleValueError as exc:
        raise GuardViolationError(f"g cannot be expanded at x0: {exc}") from exc
    coeffs = {}
    for exp in cauchy._multi_indices(n, order):
        if exp[0] or sum(exp) < 2:
            continue
        nz = [i for i in range(1, n) if exp[i]]
        a = nz[0]
        b = a if exp[a] >= 2 else nz[1]
        low = list(exp)
        low[a] -= 1
        low[b] -= 1
        denom = exp[a] * (exp[b] - (1 if a == b else 0))
        c = gs[a + 1, b + 1].coeff(low) / denom
        if c:
            coeffs[exp] = c
    v = TruncatedSeries(n, order, coeffs)
    for (a, b), s in gs.items():
        if a <= b and not v.derivative(a - 1).derivative(b - 1).agrees_with(s, order - 2):
            raise ResidualError(f"reconstructed potential fails d_{a}d_{b} v = g_{a}{b}",
                                where=("potential", a, b))
    return v


# ---------------------------------------------------------------------- reduction
@dataclass(frozen=True)
class Quadrature:
    """u_alpha = u^alpha for alpha = 2..n with u(x^1, x0^alpha) = a(x^1)."""

    n: int

    def integrate(self, gradient: Sequence[TruncatedSeries], a: TruncatedSeries, order: int) -> TruncatedSeries:
        """Coefficients of u from a (tangential) and u^alpha for the smallest normal alpha present."""
        n = self.n
        coeffs = {}
        for exp in cauchy._multi_indices(n, order):
            nz = [i for i in range(1, n) if exp[i]]
            if not nz:
                c = a.coeff(exp[:1])
            else:
                al = nz[0]
                low = exp[:al] + (exp[al] - 1,) + exp[al + 1:]
                c = gradient[al].coeff(low) / exp[al]
            if c:
                coeffs[exp] = c
        return TruncatedSeries(n, order, coeffs)

    def describe(self) -> dict:
        return {"component": self.n + 1,
                "equations": [f"u_{al} = u^{al}" for al in range(2, self.n + 1)],
                "data": "u(x^1, x0^alpha) = a(x^1)"}


def reduced_rhs(rhs: MongeRhs) -> dict:
    """{(A, alpha): F} for the first-order system in the gradient."""
    n = rhs.n
    p1 = ex.pd(1, 1)
    F = {}
    for al in rhs.normal:
        F[1, al] = ex.pd(al, 1)
        for be in rhs.normal:
            fab = ex.substitute(rhs.f[al, be], {ex.T: p1})
            F[be, al] = ex.div(ex.add(ex.mul(ex.pd(be, 1), ex.pd(al, 1)), fab), p1)
    return F


def reduce_to_first_order(rhs: MongeRhs, p0=None, pprime0=None):
    """(SystemSpec with k = 1, m = n and guard pd[1][1], quadrature descriptor for u)."""
    n = rhs.n
    if pprime0 is None:
        pprime0 = [[1]] + [[0] for _ in range(n - 1)]
    sys = SystemSpec(n, 1, n, reduced_rhs(rhs), rhs.x0, tuple(p0 or [0] * n),
                     tuple(tuple(r) for r in pprime0), (ex.pd(1, 1),))
    return sys, Quadrature(n)


def closed_form_phi_psi(rhs: MongeRhs, g: Mapping, point):
    """Phi and Psi of the reduced system for f = g t, from the closed-form expressions.

    ``point = (x, p, pprime)`` as for :func:`ckpde.compat.phi_psi`; only x and
    p^A_1 enter.  Keys match those of phi_psi.
    """
    n = rhs.n
    x, _, pprime = point
    env = {ex.x(i): as_rational(v) for i, v in enumerate(x, start=1)}
    P = {a: as_rational(pprime[a - 1][0]) for a in range(1, n + 1)}
    p1 = P[1]
    if p1 == 0:
        raise GuardViolationError("closed forms need p^1_1 != 0", guard="pd[1][1]")
    cache = {}
    dg = lambda a, b, i: ex.evaluate_point(ex.differentiate(g[a, b], ex.x(i)), env, cache)
    d = lambda i, j: 1 if i == j else 0
    N_ = rhs.normal
    phi, psi = {}, {}
    for al in N_:
        for be in N_:
            phi[1, al, be] = dg(al, be, 1)
            for ga in N_:
                phi[ga, al, be] = dg(al, ga, be) + (P[ga] * dg(al, be, 1) + P[al] * dg(ga, be, 1)) / p1
            psi[1, 1, 1, al, be, 1] = -2 * P[al] * P[be] / p1 ** 2
            for ga in N_:
                psi[1, 1, 1, al, be, ga] = 2 * (d(al, ga) * P[be] + d(be, ga) * P[al]) / p1
                psi[ga, 1, 1, al, be, 1] = -4 * P[al] * P[be] * P[ga] / p1 ** 3
                for la in N_:
                    psi[ga, 1, 1, al, be, la] = 2 * (d(al, la) * P[ga] * P[be] + d(be, la) * P[al] * P[ga]
                                                     + d(ga, la) * P[be] * P[al]) / p1 ** 2
    return phi, psi


# ---------------------------------------------------------------------- full solve
@dataclass
class MongeSolution:
    u: TruncatedSeries
    gradient: list
    order: int
    rhs: MongeRhs = field(repr=False)
    system: SystemSpec = field(repr=False)
    report: MongeReport | None = None

    def to_json(self) -> dict:
        from .series import series_to_json
        return {"order": self.order, "x0": [str(v) for v in self.rhs.x0],
                "u": series_to_json(self.u),
                "gradient": [series_to_json(s) for s in self.gradient],
                "classification": None if self.report is None else self.report.to_json()}


def _check_zero(s: TruncatedSeries, message, where):
    if not s.is_zero():
        exp, val = s.lowest_term()
        raise ResidualError(f"{message}: coefficient {val} at {list(exp)}", where=where,
                            exponent=exp, value=val)


def _data_series(s, order, name):
    if isinstance(s, TruncatedSeries):
        if s.arity != 1:
            raise SchemaError(f"{name} must be a univariate series")
        if s.order < order:
            raise SchemaError(f"{name} known only to order {s.order}, need {order}")
        return s.truncate(order)
    return TruncatedSeries.univariate(list(s), order)


def solve_full(rhs: MongeRhs, a, a_normal, order: int = 8, classify: bool = True) -> MongeSolution:
    """Solve Delta_ab(u) = f_ab(x, u_11), u(x^1, x0^alpha) = a, u_alpha(x^1, x0^alpha) = a_alpha.

    ``a_normal`` lists a_2..a_n (univariate series or coefficient lists).
    """
    n = rhs.n
    if order < 3:
        raise ValueError("solve_full needs order >= 3")
    if len(a_normal) != n - 1:
        raise SchemaError(f"need {n - 1} normal data series a_2..a_{n}")
    report = None
    if classify and n > 2:
        report = classify_rhs(rhs, order)
        if report.verdict == "inadmissible":
            raise IncompatibilityError(report.summary(), witnesses=report.witnesses)
    a = _data_series(a, order, "a")
    a_normal = [_data_series(s, order - 1, f"a_{i + 2}") for i, s in enumerate(a_normal)]
    a1 = a.derivative(0)
    if a1.derivative_at_zero([1]) == 0:
        raise GuardViolationError("a''(x0) = 0: need a nonzero second derivative of the data",
                                  guard="a''(x0) != 0")
    p0 = [a1.constant_term] + [s.constant_term for s in a_normal]
    pp = [[a1.derivative_at_zero([1])]] + [[s.derivative_at_zero([1])] for s in a_normal]
    sys, quad = reduce_to_first_order(rhs, p0, pp)
    data = cauchy.CauchyData(tuple([a1] + a_normal))
    sol = cauchy.solve(sys, data, order - 1)
    grad = sol.u
    for al in rhs.normal:
        for be in rhs.normal:
            if al < be:
                _check_zero(grad[al - 1].derivative(be - 1) - grad[be - 1].derivative(al - 1),
                            f"u^{al}_{be} != u^{be}_{al}", ("gradient-symmetry", al, be))
    u = quad.integrate(grad, a, order)
    for i in range(1, n + 1):
        _check_zero((u.derivative(i - 1) - grad[i - 1]).truncate(order - 1),
                    f"u_{i} != u^{i}", ("gradient", i))
    _check_zero(u.restrict([0]).truncate(order) - a, "u(x^1, x0) != a", ("data", 1))
    for al in rhs.normal:
        _check_zero(u.derivative(al - 1).restrict([0]).truncate(order - 1) - a_normal[al - 2],
                    f"u_{al}(x^1, x0) != a_{al}", ("data", al))
    for al, be in rhs.pairs():
        r = delta_minor(u, al, be) - _f_along(rhs, u, al, be, order - 2)
        _check_zero(r, f"Delta_{al}{be}(u) != f_{al}{be}", ("equation", al, be))
    return MongeSolution(u, grad, order, rhs, sys, report)


def _f_along(rhs: MongeRhs, u: TruncatedSeries, a, b, order):
    n = rhs.n
    env = {ex.x(i): TruncatedSeries.variable(i - 1, n, order) + rhs.x0[i - 1] for i in range(1, n + 1)}
    env[ex.T] = u.derivative(0).derivative(0).truncate(order)
    try:
        return ex.evaluate(rhs.f[a, b], env, n, order)
    except InadmissibleValueError as exc:
        raise GuardViolationError(f"f_{a}{b} cannot be composed with u_11: {exc}") from exc

