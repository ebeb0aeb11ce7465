"""Pointwise checks for the differential ideal generated by the system.

Tangent vectors at a jet point live in Q^(n+m+nm) with coordinates
``[d^1..d^n, d^1..d^m, d^1_1..d^1_n, d^2_1.., ..]`` (the p_j block is
component-major).  The generators are evaluated through their closed-form
contractions:

    eta^A(v)        = d^A - p^A_i d^i
    omega^A_al(v)   = d^A_al - F^A_{al j} d^j - F^A_{al B} d^B - F^{A L}_{al B} d^B_L
    Omega^A(v, w)   = v^A_i w^i - w^A_i v^i
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import cauchy, compat, linalg
from .errors import GuardViolationError, InadmissibleValueError, NotIntegralError, PolarSpaceError, SchemaError
from .series import as_rational
from .system import SystemSpec


@dataclass(frozen=True)
class JetPoint:
    """z = (x^i, p^A, p^A_i)."""

    x: tuple
    p: tuple
    pd: tuple  # m rows of n entries

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(as_rational(v) for v in self.x))
        object.__setattr__(self, "p", tuple(as_rational(v) for v in self.p))
        object.__setattr__(self, "pd", tuple(tuple(as_rational(v) for v in r) for r in self.pd))

    @classmethod
    def from_flat(cls, sys: SystemSpec, values) -> JetPoint:
        n, m = sys.n, sys.m
        vals = [as_rational(Fraction(v) if isinstance(v, str) else v) for v in values]
        if len(vals) != n + m + n * m:
            raise SchemaError(f"jet point needs {n + m + n * m} coordinates, got {len(vals)}")
        pd = [vals[n + m + a * n: n + m + (a + 1) * n] for a in range(m)]
        return cls(vals[:n], vals[n:n + m], pd)

    @classmethod
    def from_jet(cls, sys: SystemSpec, jet: cauchy.Jet2) -> JetPoint:
        pd = [[jet.du[a, i] for i in range(1, sys.n + 1)] for a in sys.components]
        return cls(sys.x0, [jet.u[a] for a in sys.components], pd)

    def flat(self) -> list:
        return list(self.x) + list(self.p) + [v for r in self.pd for v in r]

    def tangential_pd(self, k):
        return tuple(r[:k] for r in self.pd)


def dimension(sys: SystemSpec) -> int:
    return sys.n + sys.m + sys.n * sys.m


def _ix(sys: SystemSpec):
    n, m = sys.n, sys.m
    return (lambda i: i - 1,
            lambda a: n + a - 1,
            lambda a, j: n + m + (a - 1) * n + (j - 1))


@dataclass(frozen=True)
class IntegralElementBasis:
    """Basis e_a = d/dx^a + c^b_a d/dx^b + c^A_a d/dp^A + c^A_{aj} d/dp^A_j, a = 1..l, b = l+1..n."""

    l: int
    c_ab: tuple   # l rows of (n - l) entries
    c_aA: tuple   # l rows of m entries
    c_aAj: tuple  # l blocks of m rows of n entries

    def __post_init__(self):
        object.__setattr__(self, "c_ab", tuple(tuple(as_rational(v) for v in r) for r in self.c_ab))
        object.__setattr__(self, "c_aA", tuple(tuple(as_rational(v) for v in r) for r in self.c_aA))
        object.__setattr__(self, "c_aAj", tuple(tuple(tuple(as_rational(v) for v in r) for r in blk)
                                                for blk in self.c_aAj))

    def check_shape(self, sys: SystemSpec):
        n, m, l = sys.n, sys.m, self.l
        if not 1 <= l <= n:
            raise SchemaError(f"basis dimension l must lie in 1..{n}")
        ok = (len(self.c_ab) == l and all(len(r) == n - l for r in self.c_ab)
              and len(self.c_aA) == l and all(len(r) == m for r in self.c_aA)
              and len(self.c_aAj) == l and all(len(b) == m and all(len(r) == n for r in b)
                                               for b in self.c_aAj))
        if not ok:
            raise SchemaError("basis coefficients have the wrong shape")

    def vectors(self, sys: SystemSpec) -> list:
        self.check_shape(sys)
        ix, ip, ipd = _ix(sys)
        out = []
        for a in range(1, self.l + 1):
            v = [Fraction(0)] * dimension(sys)
            v[ix(a)] = Fraction(1)
            for b in range(self.l + 1, sys.n + 1):
                v[ix(b)] = self.c_ab[a - 1][b - self.l - 1]
            for A in sys.components:
                v[ip(A)] = self.c_aA[a - 1][A - 1]
                for j in range(1, sys.n + 1):
                    v[ipd(A, j)] = self.c_aAj[a - 1][A - 1][j - 1]
            out.append(v)
        return out

    @classmethod
    def from_vectors(cls, sys: SystemSpec, vectors) -> IntegralElementBasis:
        """Normal form of a subspace whose projection to x^1..x^l is onto."""
        l = len(vectors)
        red, piv = linalg.rref(vectors, dimension(sys))
        if piv[:l] != list(range(l)):
            raise SchemaError("subspace is not a graph over x^1..x^l")
        ix, ip, ipd = _ix(sys)
        rows = red[:l]
        return cls(l,
                   [[r[ix(b)] for b in range(l + 1, sys.n + 1)] for r in rows],
                   [[r[ip(A)] for A in sys.components] for r in rows],
                   [[[r[ipd(A, j)] for j in range(1, sys.n + 1)] for A in sys.components] for r in rows])

    def to_json(self) -> dict:
        return {"l": self.l,
                "c_ab": [[str(v) for v in r] for r in self.c_ab],
                "c_aA": [[str(v) for v in r] for r in self.c_aA],
                "c_aAj": [[[str(v) for v in r] for r in b] for b in self.c_aAj]}

    @classmethod
    def from_json(cls, doc: Mapping) -> IntegralElementBasis:
        try:
            conv = lambda v: Fraction(v) if isinstance(v, str) else v
            return cls(int(doc["l"]),
                       [[conv(v) for v in r] for r in doc["c_ab"]],
                       [[conv(v) for v in r] for r in doc["c_aA"]],
                       [[[conv(v) for v in r] for r in b] for b in doc["c_aAj"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"basis document needs l, c_ab, c_aA, c_aAj ({exc})") from exc


# ---------------------------------------------------------------------- forms
class Forms:
    """The generating forms evaluated at a fixed jet point."""

    def __init__(self, sys: SystemSpec, z: JetPoint):
        if len(z.x) != sys.n or len(z.p) != sys.m or len(z.pd) != sys.m \
                or any(len(r) != sys.n for r in z.pd):
            raise SchemaError("jet point has the wrong shape")
        self.sys = sys
        self.z = z
        try:
            self.F, self.Fx, self.Fp, self.Fpd = compat._point_derivatives(
                sys, sys.point_env(z.x, z.p, z.tangential_pd(sys.k)))
        except InadmissibleValueError as exc:
            raise GuardViolationError(f"right-hand side undefined at z: {exc}", guard=exc.guard) from exc
        sys.check_guards(sys.point_env(z.x, z.p, z.tangential_pd(sys.k)))
        self.ix, self.ip, self.ipd = _ix(sys)

    def f(self, a, al):
        return self.z.pd[a - 1][al - 1] - self.F[a, al]

    def eta_row(self, a):
        row = [Fraction(0)] * dimension(self.sys)
        row[self.ip(a)] = Fraction(1)
        for i in range(1, self.sys.n + 1):
            row[self.ix(i)] -= self.z.pd[a - 1][i - 1]
        return row

    def omega_row(self, a, al):
        sys = self.sys
        row = [Fraction(0)] * dimension(sys)
        row[self.ipd(a, al)] += 1
        for j in range(1, sys.n + 1):
            row[self.ix(j)] -= self.Fx[a, al, j]
        for b in sys.components:
            row[self.ip(b)] -= self.Fp[a, al, b]
            for l in sys.tangential:
                row[self.ipd(b, l)] -= self.Fpd[a, al, b, l]
        return row

    def Omega_row(self, a, w):
        """Row r with r . v = Omega^A(v, w)."""
        row = [Fraction(0)] * dimension(self.sys)
        for i in range(1, self.sys.n + 1):
            row[self.ipd(a, i)] += w[self.ix(i)]
            row[self.ix(i)] -= w[self.ipd(a, i)]
        return row

    @staticmethod
    def apply(row, v):
        return sum((r * x for r, x in zip(row, v) if r and x), Fraction(0))

    def eta(self, a, v):
        return self.apply(self.eta_row(a), v)

    def omega(self, a, al, v):
        return self.apply(self.omega_row(a, al), v)

    def Omega(self, a, v, w):
        return self.apply(self.Omega_row(a, w), v)


@dataclass
class ElementResiduals:
    f: dict
    g: dict
    g_omega: dict
    h: dict

    def all_zero(self) -> bool:
        return not any(v for d in (self.f, self.g, self.g_omega, self.h) for v in d.values())

    def nonzero(self) -> list:
        out = []
        for name, d in (("f", self.f), ("g", self.g), ("g_omega", self.g_omega), ("h", self.h)):
            out.extend((name, k, v) for k, v in sorted(d.items()) if v)
        return out

    def to_json(self) -> dict:
        enc = lambda d: {",".join(map(str, k)): str(v) for k, v in sorted(d.items())}
        return {"f": enc(self.f), "g": enc(self.g), "g_omega": enc(self.g_omega), "h": enc(self.h),
                "integral": self.all_zero()}


def _as_vectors(sys, E):
    if isinstance(E, IntegralElementBasis):
        return E.vectors(sys)
    vecs = [[as_rational(v) for v in vec] for vec in E]
    if any(len(v) != dimension(sys) for v in vecs):
        raise SchemaError(f"tangent vectors need {dimension(sys)} coordinates")
    return vecs


def element_residuals(sys: SystemSpec, z: JetPoint, basis) -> ElementResiduals:
    """The family f, g = eta(e_a), g_omega = omega(e_a), h = Omega(e_a, e_a') at z."""
    forms = Forms(sys, z)
    vecs = _as_vectors(sys, basis)
    f = {(a, al): forms.f(a, al) for a in sys.components for al in sys.normal}
    g, gw, h = {}, {}, {}
    for r, v in enumerate(vecs, start=1):
        for a in sys.components:
            g[a, r] = forms.eta(a, v)
            for al in sys.normal:
                gw[a, al, r] = forms.omega(a, al, v)
    for r in range(len(vecs)):
        for s in range(r + 1, len(vecs)):
            for a in sys.components:
                h[a, r + 1, s + 1] = forms.Omega(a, vecs[r], vecs[s])
    return ElementResiduals(f, g, gw, h)


def is_integral(sys: SystemSpec, z: JetPoint, E) -> bool:
    return element_residuals(sys, z, E).all_zero()


# ---------------------------------------------------------------------- jet graphs
def jet_graph_vectors(sys: SystemSpec, jet: cauchy.Jet2, indices=None) -> list:
    """Tangent vectors d/dx^i + u^A_i d/dp^A + u^A_{ij} d/dp^A_j of the jet graph at x0."""
    ix, ip, ipd = _ix(sys)
    indices = range(1, sys.n + 1) if indices is None else indices
    out = []
    for i in indices:
        v = [Fraction(0)] * dimension(sys)
        v[ix(i)] = Fraction(1)
        for a in sys.components:
            v[ip(a)] = jet.du[a, i]
            for j in range(1, sys.n + 1):
                v[ipd(a, j)] = jet.second(a, i, j)
        out.append(v)
    return out


def data_element(sys: SystemSpec, jet: cauchy.Jet2):
    """(z, k-dimensional tangent of the data jet graph) for an approximate 2-jet."""
    z = JetPoint.from_jet(sys, jet)
    vecs = jet_graph_vectors(sys, jet, sys.tangential)
    return z, IntegralElementBasis.from_vectors(sys, vecs)


# ---------------------------------------------------------------------- polar spaces
@dataclass
class PolarSpaceResult:
    dim: int
    basis: list
    relations: list | None = None
    slope: tuple | None = None
    determinant: Fraction | None = None
    notes: list = field(default_factory=list)

    @property
    def noncharacteristic(self):
        return None if self.determinant is None else self.determinant != 0

    def contains(self, vectors) -> bool:
        return all(linalg.in_span(self.basis, v) for v in vectors)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "basis": [[str(v) for v in vec] for vec in self.basis],
            "relations": None if self.relations is None
            else [[str(v) for v in vec] for vec in self.relations],
            "slope": None if self.slope is None else [[str(v) for v in r] for r in self.slope],
            "determinant": None if self.determinant is None else str(self.determinant),
            "notes": list(self.notes),
        }


def _projected_slope(sys: SystemSpec, vecs):
    """Slope c^alpha_L of k combinations of the form d/dx^L + c^alpha_L d/dx^alpha + ..., if any."""
    if not vecs:
        return None
    red, piv = linalg.rref(vecs, dimension(sys))
    k = sys.k
    if piv[:k] != list(range(k)):
        return None
    return tuple(tuple(red[l - 1][al - 1] for l in sys.tangential) for al in sys.normal)


def polar_space(sys: SystemSpec, z: JetPoint, E) -> PolarSpaceResult:
    """H(E) as the solution space of omega(v) = 0, eta(v) = 0, Omega(v, e) = 0 for e in E."""
    vecs = _as_vectors(sys, E)
    res = element_residuals(sys, z, vecs)
    if not res.all_zero():
        bad = ", ".join(f"{name}{list(key)} = {val}" for name, key, val in res.nonzero()[:4])
        raise NotIntegralError(f"E is not an integral element at z: {bad}")
    forms = Forms(sys, z)
    rows = [forms.omega_row(a, al) for a in sys.components for al in sys.normal]
    rows += [forms.eta_row(a) for a in sys.components]
    rows += [forms.Omega_row(a, e) for e in vecs for a in sys.components]
    basis = linalg.nullspace(rows, dimension(sys))
    out = PolarSpaceResult(len(basis), basis)
    slope = _projected_slope(sys, vecs)
    if slope is None:
        out.notes.append("E has no k vectors projecting onto the tangential directions")
        return out
    out.slope = slope
    point = (z.x, z.p, z.tangential_pd(sys.k))
    _, out.determinant = cauchy.slope_noncharacteristic(sys, slope, point)
    if out.determinant == 0:
        out.notes.append("projected slope is characteristic; dimension reported without interpretation")
        return out
    red, piv = linalg.rref(basis, dimension(sys)) if basis else ([], [])
    if out.dim != sys.n or piv[:sys.n] != list(range(sys.n)):
        raise PolarSpaceError(
            f"non-characteristic projection but dim H(E) = {out.dim} and the space is "
            f"{'not ' if piv[:sys.n] != list(range(sys.n)) else ''}a graph over dx")
    out.relations = red
    return out


def subspace_contains(big, small) -> bool:
    return all(linalg.in_span(big, v) for v in small)


def monotone(sys: SystemSpec, z: JetPoint, E, E_sub) -> bool:
    """H(E) is contained in H(E') whenever E' is a subspace of E."""
    big = _as_vectors(sys, E)
    sub = _as_vectors(sys, E_sub)
    if not subspace_contains(big, sub):
        raise SchemaError("second element is not a subspace of the first")
    return subspace_contains(polar_space(sys, z, E_sub).basis, polar_space(sys, z, E).basis)
