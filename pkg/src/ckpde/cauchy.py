"""Approximate 2-jets, slope tests and the exact power-series Cauchy solver.

All series are germs at the origin of translated coordinates ``y = x - x0``.
Cauchy data are series in the tangential variables ``y^1..y^k``; a solution
is a list of ``m`` series in ``y^1..y^n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Mapping, Sequence

from . import compat
from . import expr as ex
from . import linalg
from .errors import (
    CharacteristicSlopeError,
    DataMismatchError,
    GuardViolationError,
    IncompatibilityError,
    InadmissibleValueError,
    ResidualError,
    SchemaError,
    SingularSystemError,
)
from .series import TruncatedSeries, as_rational, series_from_json, series_to_json
from .system import SystemSpec


# ---------------------------------------------------------------------- data types
@dataclass(frozen=True)
class CauchyData:
    """Initial values ``a^A(y^1..y^k)`` on the plane through the base point."""

    series: tuple

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        if not self.series:
            raise SchemaError("Cauchy data need at least one component")
        arity = self.series[0].arity
        if any(s.arity != arity for s in self.series):
            raise SchemaError("all Cauchy data components must have the same arity")

    @property
    def arity(self) -> int:
        return self.series[0].arity

    @property
    def order(self) -> int:
        return min(s.order for s in self.series)

    def value(self, a):
        return self.series[a - 1].constant_term

    def first(self, a, lam):
        exp = tuple(int(i == lam - 1) for i in range(self.arity))
        return self.series[a - 1].derivative_at_zero(exp)

    def second(self, a, lam, gam):
        exp = [0] * self.arity
        exp[lam - 1] += 1
        exp[gam - 1] += 1
        return self.series[a - 1].derivative_at_zero(exp)

    def jet(self) -> DataJet:
        m, k = len(self.series), self.arity
        return DataJet(
            tuple(self.value(a) for a in range(1, m + 1)),
            tuple(tuple(self.first(a, l) for l in range(1, k + 1)) for a in range(1, m + 1)),
            tuple(tuple(tuple(self.second(a, l, g) for g in range(1, k + 1)) for l in range(1, k + 1))
                  for a in range(1, m + 1)),
        )

    def to_json(self) -> dict:
        return {"data": [series_to_json(s) for s in self.series]}

    @classmethod
    def from_json(cls, doc) -> CauchyData:
        items = doc.get("data") if isinstance(doc, Mapping) else doc
        if not isinstance(items, Sequence):
            raise SchemaError("Cauchy data document needs a list 'data'")
        try:
            return cls(tuple(series_from_json(s) for s in items))
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc


@dataclass(frozen=True)
class DataJet:
    """2-jet of Cauchy data at the base point: a^A, a^A_L, a^A_{LG} (1-based lists)."""

    a0: tuple
    a1: tuple
    a2: tuple

    def __post_init__(self):
        object.__setattr__(self, "a0", tuple(as_rational(v) for v in self.a0))
        object.__setattr__(self, "a1", tuple(tuple(as_rational(v) for v in r) for r in self.a1))
        object.__setattr__(self, "a2", tuple(tuple(tuple(as_rational(v) for v in r) for r in blk)
                                             for blk in self.a2))
        for blk in self.a2:
            k = len(blk)
            for i in range(k):
                for j in range(k):
                    if blk[i][j] != blk[j][i]:
                        raise SchemaError("second derivatives of the data must be symmetric")

    @classmethod
    def from_system(cls, sys: SystemSpec, a2=None) -> DataJet:
        """The data jet matching the base point, with given (or zero) second derivatives."""
        if a2 is None:
            a2 = [[[0] * sys.k for _ in range(sys.k)] for _ in range(sys.m)]
        return cls(sys.p0, sys.pprime0, a2)


@dataclass(frozen=True)
class Jet2:
    """Values u^A, u^A_i, u^A_{ij} at the base point (1-based keys)."""

    u: Mapping
    du: Mapping
    ddu: Mapping

    def second(self, a, i, j):
        return self.ddu[(a, min(i, j), max(i, j))]

    def to_json(self) -> dict:
        return {
            "u": {str(a): str(v) for a, v in sorted(self.u.items())},
            "du": {f"{a},{i}": str(v) for (a, i), v in sorted(self.du.items())},
            "ddu": {f"{a},{i},{j}": str(v) for (a, i, j), v in sorted(self.ddu.items())},
        }


def normalize_slope(sys: SystemSpec, slope) -> tuple:
    """Slope as an (n-k) x k tuple of rationals; row r is alpha = k + 1 + r."""
    if slope is None:
        return tuple(tuple(Fraction(0) for _ in range(sys.k)) for _ in sys.normal)
    if isinstance(slope, Mapping):
        return tuple(tuple(as_rational(slope.get((al, lam), 0)) for lam in sys.tangential)
                     for al in sys.normal)
    rows = tuple(tuple(as_rational(v) for v in row) for row in slope)
    if len(rows) != sys.n - sys.k or any(len(r) != sys.k for r in rows):
        raise SchemaError(f"slope must be a {sys.n - sys.k} x {sys.k} matrix")
    return rows


def _c(slope, sys, al, lam):
    return slope[al - sys.k - 1][lam - 1]


# ---------------------------------------------------------------------- pointwise derivatives
def _derivs(sys: SystemSpec, x=None, p=None, pprime=None):
    env = sys.point_env(x, p, pprime)
    try:
        sys.check_guards(env)
        return compat._point_derivatives(sys, env)
    except InadmissibleValueError as exc:
        raise GuardViolationError(f"right-hand side undefined at the point: {exc}",
                                  guard=exc.guard) from exc


def _check_data(sys: SystemSpec, jet: DataJet):
    if len(jet.a0) != sys.m or len(jet.a1) != sys.m or any(len(r) != sys.k for r in jet.a1):
        raise SchemaError("data jet has the wrong shape")
    if tuple(jet.a0) != tuple(sys.p0):
        raise DataMismatchError(f"data values {list(map(str, jet.a0))} differ from p0 "
                                f"{list(map(str, sys.p0))}")


def approximate_jet(sys: SystemSpec, data) -> Jet2:
    """The unique 2-jet of an approximate solution, or an incompatibility error.

    The second normal block is computed for every ordered pair (alpha, beta)
    and must come out symmetric.
    """
    jet = data.jet() if isinstance(data, CauchyData) else data
    _check_data(sys, jet)
    if tuple(jet.a1) != tuple(sys.pprime0):
        raise DataMismatchError("first derivatives of the data differ from pprime0")
    F, Fx, Fp, Fpd = _derivs(sys)
    A_, N_, T_ = sys.components, sys.normal, sys.tangential
    a1 = lambda b, l: jet.a1[b - 1][l - 1]
    a2 = lambda b, l, g: jet.a2[b - 1][l - 1][g - 1]
    u, du, ddu = {}, {}, {}
    for a in A_:
        u[a] = jet.a0[a - 1]
        for l in T_:
            du[a, l] = a1(a, l)
            for g in T_:
                if l <= g:
                    ddu[a, l, g] = a2(a, l, g)
        for al in N_:
            du[a, al] = F[a, al]
            for l in T_:
                ddu[a, l, al] = (Fx[a, al, l] + sum(Fp[a, al, b] * a1(b, l) for b in A_)
                                 + sum(Fpd[a, al, b, g] * a2(b, g, l) for b in A_ for g in T_))
    full = {}
    for a, al, be in product(A_, N_, N_):
        v = Fx[a, al, be] + sum(Fp[a, al, b] * F[b, be] for b in A_)
        for b, g in product(A_, T_):
            inner = Fx[b, be, g] + sum(Fp[b, be, c] * a1(c, g) for c in A_)
            inner += sum(Fpd[b, be, c, o] * a2(c, o, g) for c in A_ for o in T_)
            v += Fpd[a, al, b, g] * inner
        full[a, al, be] = v
    bad = [(a, al, be) for a, al, be in full if al < be and full[a, al, be] != full[a, be, al]]
    if bad:
        report = compat.check_compatibility(sys, samples=1, symbolic=False)
        raise IncompatibilityError(
            "second normal derivatives are not symmetric: "
            + ", ".join(f"u^{a}_{al}{be} - u^{a}_{be}{al} = {full[a, al, be] - full[a, be, al]}"
                        for a, al, be in bad),
            witnesses=report.witnesses)
    for a, al, be in full:
        if al <= be:
            ddu[a, al, be] = full[a, al, be]
    return Jet2(u, du, ddu)


def _symmetric_pairs(k):
    return list(combinations_with_replacement(range(1, k + 1), 2))


def approximately_solvable(sys: SystemSpec) -> bool:
    """Whether an approximate 2-jet exists for every choice of second derivatives of the data.

    The second normal block is affine in those derivatives, so it suffices to
    try zero and each element of the symmetric unit basis.
    """
    choices = [None]
    for a in sys.components:
        for l, g in _symmetric_pairs(sys.k):
            blk = [[[0] * sys.k for _ in range(sys.k)] for _ in range(sys.m)]
            blk[a - 1][l - 1][g - 1] = 1
            blk[a - 1][g - 1][l - 1] = 1
            choices.append(blk)
    for a2 in choices:
        try:
            approximate_jet(sys, DataJet.from_system(sys, a2))
        except IncompatibilityError:
            return False
    return True


# ---------------------------------------------------------------------- slopes
def slope_matrix(sys: SystemSpec, slope, point=None):
    """The m(n-k) square matrix V^{A,beta}_{B,alpha} = delta + F^{A L}_{alpha B} c^beta_L.

    Rows are indexed by (A, alpha) and columns by (B, beta) in lexicographic order.
    """
    slope = normalize_slope(sys, slope)
    x, p, pp = point if point is not None else (None, None, None)
    _, _, _, Fpd = _derivs(sys, x, p, pp)
    keys = [(a, al) for a in sys.components for al in sys.normal]
    V = []
    for a, al in keys:
        row = []
        for b, be in keys:
            v = Fraction(int(a == b and al == be))
            v += sum(Fpd[a, al, b, l] * _c(slope, sys, be, l) for l in sys.tangential)
            row.append(v)
        V.append(row)
    return V


def slope_noncharacteristic(sys: SystemSpec, slope, point=None):
    """(is non-characteristic, exact determinant of V)."""
    d = linalg.det(slope_matrix(sys, slope, point))
    return d != 0, d


def tilted_approximate_jet(sys: SystemSpec, slope, data) -> Jet2:
    """2-jet of an approximate solution with data on the tilted plane x^alpha = c^alpha_L x^L.

    Solves the exact linear system for (u_{LG}, u_{alpha L}, u_{alpha beta});
    the equations for alpha > beta are checked for consistency afterwards.
    """
    slope = normalize_slope(sys, slope)
    jet = data.jet() if isinstance(data, CauchyData) else data
    _check_data(sys, jet)
    ok, d = slope_noncharacteristic(sys, slope)
    if not ok:
        raise CharacteristicSlopeError(f"slope is characteristic (det V = {d})", determinant=d)
    F, Fx, Fp, Fpd = _derivs(sys)
    A_, N_, T_ = sys.components, sys.normal, sys.tangential
    c = lambda al, l: _c(slope, sys, al, l)
    pp = lambda b, l: sys.pprime0[b - 1][l - 1]
    for a, l in product(A_, T_):
        expected = pp(a, l) + sum(F[a, al] * c(al, l) for al in N_)
        if jet.a1[a - 1][l - 1] != expected:
            raise DataMismatchError(
                f"tilted data need a^{a}_{l}(x0) = {expected}, got {jet.a1[a - 1][l - 1]}")

    unknowns = {}

    def uid(a, i, j):
        key = (a, min(i, j), max(i, j))
        if key not in unknowns:
            unknowns[key] = len(unknowns)
        return unknowns[key]

    for a in A_:
        for i, j in _symmetric_pairs(sys.n):
            uid(a, i, j)
    size = len(unknowns)
    rows, rhs, tags = [], [], []

    def emit(coeffs, value, tag):
        row = [Fraction(0)] * size
        for key, v in coeffs:
            row[key] += v
        rows.append(row)
        rhs.append(value)
        tags.append(tag)

    for a in A_:
        for l, g in _symmetric_pairs(sys.k):
            co = [(uid(a, l, g), 1)]
            co += [(uid(a, l, be), c(be, g)) for be in N_]
            co += [(uid(a, al, g), c(al, l)) for al in N_]
            co += [(uid(a, al, be), c(al, l) * c(be, g)) for al in N_ for be in N_]
            emit(co, jet.a2[a - 1][l - 1][g - 1], ("data", a, l, g))
    for a, al, l in product(A_, N_, T_):
        co = [(uid(a, al, l), 1)]
        co += [(uid(b, g, l), -Fpd[a, al, b, g]) for b in A_ for g in T_]
        emit(co, Fx[a, al, l] + sum(Fp[a, al, b] * pp(b, l) for b in A_), ("mixed", a, al, l))
    extra = []
    for a, al, be in product(A_, N_, N_):
        co = [(uid(a, al, be), 1)]
        value = Fx[a, al, be] + sum(Fp[a, al, b] * F[b, be] for b in A_)
        for b, g in product(A_, T_):
            value += Fpd[a, al, b, g] * (Fx[b, be, g] + sum(Fp[b, be, cc] * pp(cc, g) for cc in A_))
            co += [(uid(cc, o, g), -Fpd[a, al, b, g] * Fpd[b, be, cc, o]) for cc in A_ for o in T_]
        if al <= be:
            emit(co, value, ("normal", a, al, be))
        else:
            extra.append((co, value, ("normal", a, al, be)))
    try:
        sol = linalg.solve(rows, rhs)
    except SingularSystemError as exc:
        raise SingularSystemError(f"tilted jet equations not uniquely solvable: {exc}",
                                  block="data/mixed/normal") from exc
    bad = []
    for co, value, tag in extra:
        lhs = sum((v * sol[key] for key, v in co), Fraction(0))
        if lhs != value:
            bad.append((tag, lhs - value))
    if bad:
        report = compat.check_compatibility(sys, samples=1, symbolic=False)
        raise IncompatibilityError(
            "tilted jet equations inconsistent in block "
            + ", ".join(f"u^{t[1]}_{t[2]}{t[3]} (residual {r})" for t, r in bad),
            witnesses=report.witnesses)
    u, du, ddu = {}, {}, {}
    for a in A_:
        u[a] = jet.a0[a - 1]
        for l in T_:
            du[a, l] = pp(a, l)
        for al in N_:
            du[a, al] = F[a, al]
    for key, idx in unknowns.items():
        ddu[key] = sol[idx]
    return Jet2(u, du, ddu)


# ---------------------------------------------------------------------- series solver
@dataclass
class SolutionSeries:
    u: list
    order: int
    system: SystemSpec = field(repr=False)
    data: CauchyData = field(repr=False)
    slope: tuple | None = None

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "x0": [str(v) for v in self.system.x0],
            "u": [series_to_json(s) for s in self.u],
            "slope": None if self.slope is None else [[str(v) for v in r] for r in self.slope],
        }


def _multi_indices(n, max_degree):
    out = []

    def rec(prefix, remaining, slots):
        if slots == 0:
            out.append(tuple(prefix))
            return
        for e in range(remaining + 1):
            prefix.append(e)
            rec(prefix, remaining - e, slots - 1)
            prefix.pop()

    rec([], max_degree, n)
    out.sort(key=lambda e: (sum(e), e))
    return out


def _coordinate_env(sys: SystemSpec, order: int, slope=None):
    """x^i as series in the (possibly tilted) coordinates centred at x0."""
    n = sys.n
    env = {}
    for i in range(1, n + 1):
        s = TruncatedSeries.variable(i - 1, n, order) + sys.x0[i - 1]
        if slope is not None and i > sys.k:
            for l in sys.tangential:
                cv = _c(slope, sys, i, l)
                if cv:
                    s = s + TruncatedSeries.variable(l - 1, n, order).scale(cv)
        env[ex.x(i)] = s
    return env


def _compose(sys: SystemSpec, u, order, slope=None):
    """F^A_alpha(x, u, u_L) for every (A, alpha) as series of the given order."""
    env = _coordinate_env(sys, order + 1, slope)
    for a in sys.components:
        env[ex.p(a)] = u[a - 1]
        for l in sys.tangential:
            d = u[a - 1].derivative(l - 1)
            if slope is not None:
                for be in sys.normal:
                    cv = _c(slope, sys, be, l)
                    if cv:
                        d = d - u[a - 1].derivative(be - 1).scale(cv)
            env[ex.pd(a, l)] = d
    cache = {}
    out = {}
    try:
        for a in sys.components:
            for al in sys.normal:
                out[a, al] = ex.evaluate(sys.rhs(a, al), env, sys.n, order, cache)
    except InadmissibleValueError as exc:
        raise GuardViolationError(f"composition left the domain of F: {exc}", guard=exc.guard) from exc
    return out


def _check_series_data(sys: SystemSpec, data: CauchyData, order: int, slope=None):
    if len(data.series) != sys.m:
        raise SchemaError(f"need {sys.m} data components, got {len(data.series)}")
    if data.arity != sys.k:
        raise SchemaError(f"data must be series in {sys.k} variables, got arity {data.arity}")
    if data.order < order:
        raise SchemaError(f"data known only to order {data.order}, need {order}")
    jet = data.jet()
    if tuple(jet.a0) != tuple(sys.p0):
        raise DataMismatchError("data values at the base point differ from p0")
    if slope is None:
        if tuple(jet.a1) != tuple(sys.pprime0):
            raise DataMismatchError("data first derivatives at the base point differ from pprime0")
    else:
        F, _, _, _ = _derivs(sys)
        for a, l in product(sys.components, sys.tangential):
            expected = sys.pprime0[a - 1][l - 1] + sum(
                F[a, al] * _c(slope, sys, al, l) for al in sys.normal)
            if jet.a1[a - 1][l - 1] != expected:
                raise DataMismatchError(
                    f"tilted data need a^{a}_{l}(x0) = {expected}, got {jet.a1[a - 1][l - 1]}")
    sys.check_guards(sys.point_env())


def _first_normal(sys: SystemSpec, exp):
    for al in sys.normal:
        if exp[al - 1]:
            return al
    return None


def solve(sys: SystemSpec, data: CauchyData, order: int = 8, slope=None,
          check: bool = True) -> SolutionSeries:
    """Taylor coefficients of the solution to total degree ``order``.

    Without a slope the coefficients are produced level by level in the
    number of normal derivatives, always differentiating the equation for the
    smallest normal direction present.  With a slope the problem is solved in
    tilted coordinates degree by degree and pulled back.  Afterwards the full
    residual is checked (``u_alpha - F_alpha`` to order N-1, data to order N).
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if slope is not None:
        slope = normalize_slope(sys, slope)
        if all(v == 0 for r in slope for v in r):
            slope = None
    if slope is not None:
        ok, d = slope_noncharacteristic(sys, slope)
        if not ok:
            raise CharacteristicSlopeError(f"slope is characteristic (det V = {d})", determinant=d)
    _check_series_data(sys, data, order, slope)
    if slope is None:
        u = _solve_levels(sys, data, order)
    else:
        w = _solve_linear(sys, data, order, slope)
        u = [pull_back(s, sys, slope) for s in w]
    sol = SolutionSeries(u, order, sys, data, slope)
    if check:
        eq, mismatch = residual(sys, sol, data)
        _raise_if_nonzero(eq, mismatch)
    return sol


def _raise_if_nonzero(eq, mismatch):
    for (a, al), s in sorted(eq.items()):
        if not s.is_zero():
            exp, val = s.lowest_term()
            raise ResidualError(
                f"residual u^{a}_{al} - F^{a}_{al} has nonzero coefficient {val} at {exp}",
                where=("equation", a, al), exponent=exp, value=val)
    for a, s in enumerate(mismatch, start=1):
        if not s.is_zero():
            exp, val = s.lowest_term()
            raise ResidualError(f"data mismatch for u^{a}: coefficient {val} at {exp}",
                                where=("data", a), exponent=exp, value=val)


def _solve_levels(sys: SystemSpec, data: CauchyData, order: int):
    n, k = sys.n, sys.k
    indices = _multi_indices(n, order)
    by_level = {}
    for e in indices:
        by_level.setdefault(sum(e[k:]), []).append(e)
    coeffs = [dict() for _ in sys.components]
    for a in sys.components:
        src = data.series[a - 1]
        for e in by_level.get(0, []):
            c = src.coeff(e[:k])
            if c:
                coeffs[a - 1][e] = c
    for level in range(1, order + 1):
        u = [TruncatedSeries(n, order, c) for c in coeffs]
        comp = _compose(sys, u, order - 1)
        for e in by_level.get(level, []):
            al = _first_normal(sys, e)
            lower = e[:al - 1] + (e[al - 1] - 1,) + e[al:]
            for a in sys.components:
                v = comp[a, al].coeff(lower) / e[al - 1]
                if v:
                    coeffs[a - 1][e] = v
    return [TruncatedSeries(n, order, c) for c in coeffs]


def _solve_linear(sys: SystemSpec, data: CauchyData, order: int, slope):
    """Degree-by-degree solve in tilted coordinates (tangential y^L, normal y^alpha - c y^L)."""
    n, k = sys.n, sys.k
    A_, N_, T_ = sys.components, sys.normal, sys.tangential
    indices = _multi_indices(n, order)
    coeffs = [dict() for _ in A_]
    for a in A_:
        src = data.series[a - 1]
        for e in indices:
            if not any(e[k:]):
                c = src.coeff(e[:k])
                if c:
                    coeffs[a - 1][e] = c
    F, _, _, Fpd = _derivs(sys)
    for a, al in product(A_, N_):
        e = tuple(int(i == al - 1) for i in range(n))
        if order >= 1 and F[a, al]:
            coeffs[a - 1][e] = F[a, al]
    c = lambda al, l: _c(slope, sys, al, l)
    for deg in range(2, order + 1):
        level = [e for e in indices if sum(e) == deg and any(e[k:])]
        unknown = [(a, e) for a in A_ for e in level]
        pos = {key: i for i, key in enumerate(unknown)}
        w = [TruncatedSeries(n, deg, cf) for cf in coeffs]
        comp = _compose(sys, w, deg - 1, slope)
        M, rhs = [], []
        for a, e in unknown:
            al = _first_normal(sys, e)
            J = e[:al - 1] + (e[al - 1] - 1,) + e[al:]
            row = [Fraction(0)] * len(unknown)
            row[pos[a, e]] += e[al - 1]
            for b, l in product(A_, T_):
                d = Fpd[a, al, b, l]
                if not d:
                    continue
                K = J[:l - 1] + (J[l - 1] + 1,) + J[l:]
                if (b, K) in pos:
                    row[pos[b, K]] -= d * (J[l - 1] + 1)
                for be in N_:
                    if not c(be, l):
                        continue
                    K = J[:be - 1] + (J[be - 1] + 1,) + J[be:]
                    if (b, K) in pos:
                        row[pos[b, K]] += d * c(be, l) * (J[be - 1] + 1)
            M.append(row)
            rhs.append(comp[a, al].coeff(J))
        try:
            sol = linalg.solve(M, rhs)
        except SingularSystemError as exc:
            raise SingularSystemError(f"degree {deg} coefficient system is singular: {exc}",
                                      block=deg) from exc
        for (a, e), v in zip(unknown, sol):
            if v:
                coeffs[a - 1][e] = v
    return [TruncatedSeries(n, order, cf) for cf in coeffs]


def pull_back(w: TruncatedSeries, sys: SystemSpec, slope) -> TruncatedSeries:
    """u(y) = w(y^L, y^alpha - c^alpha_L y^L)."""
    n, k = sys.n, sys.k
    matrix = []
    for i in range(1, n + 1):
        row = [Fraction(int(i == j)) for j in range(1, n + 1)]
        if i > k:
            for l in sys.tangential:
                row[l - 1] -= _c(slope, sys, i, l)
        matrix.append(row)
    return w.linear_substitute(matrix, n)


def restrict_to_plane(u: TruncatedSeries, sys: SystemSpec, slope=None) -> TruncatedSeries:
    """u(y^L, c^alpha_L y^L) as a series in the k tangential variables."""
    k = sys.k
    if slope is None:
        return u.restrict(list(range(k)))
    slope = normalize_slope(sys, slope)
    matrix = []
    for i in range(1, sys.n + 1):
        if i <= k:
            matrix.append([Fraction(int(i == j)) for j in range(1, k + 1)])
        else:
            matrix.append([_c(slope, sys, i, l) for l in range(1, k + 1)])
    return u.linear_substitute(matrix, k)


def residual(sys: SystemSpec, solution, data: CauchyData):
    """(PDE residuals u_alpha - F_alpha to order N-1, data mismatch to order N)."""
    u = solution.u if isinstance(solution, SolutionSeries) else list(solution)
    slope = solution.slope if isinstance(solution, SolutionSeries) else None
    order = min(s.order for s in u)
    if any(s.arity != sys.n for s in u):
        raise SchemaError("solution series must have arity n")
    comp = _compose(sys, u, order - 1)
    eq = {}
    for a, al in comp:
        eq[a, al] = (u[a - 1].derivative(al - 1) - comp[a, al]).truncate(order - 1)
    mismatch = []
    for a in sys.components:
        r = restrict_to_plane(u[a - 1], sys, slope)
        ref = data.series[a - 1]
        top = min(order, ref.order)
        mismatch.append(r.truncate(top) - ref.truncate(top))
    return eq, mismatch


def is_clean(eq, mismatch) -> bool:
    return all(s.is_zero() for s in eq.values()) and all(s.is_zero() for s in mismatch)


def residual_summary(eq, mismatch) -> str:
    """'clean' or the highest degree carrying a nonzero residual term."""
    degrees = [sum(e) for s in list(eq.values()) + list(mismatch) for e, _ in s.items()]
    if not degrees:
        return "clean"
    return f"nonzero residual up to degree {max(degrees)} (lowest degree {min(degrees)})"


def tilted_data(solution: SolutionSeries, slope, order: int | None = None) -> CauchyData:
    """Restriction of an untilted solution to the tilted plane, as new Cauchy data."""
    sys = solution.system
    series = [restrict_to_plane(s, sys, slope) for s in solution.u]
    if order is not None:
        series = [s.truncate(order) for s in series]
    return CauchyData(tuple(series))
