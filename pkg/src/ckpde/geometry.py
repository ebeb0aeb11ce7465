"""Hypersurfaces with rank-one Gauss map built from a curve on the sphere,
and the finite nondegeneracy of their tubes at the origin.

A curve gamma(t) in S^n with gamma(0) = (0, .., 0, -1) is pushed to R^n by the
projection P(x, -sqrt(1 - |x|^2)) = x / sqrt(1 - |x|^2).  The image
Gamma = (phi, a_2, .., a_n) gives Cauchy data a = int phi, a_alpha for the
homogeneous Monge-Ampere system, whose solution u has gradient Gamma on the
x^1 axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from . import linalg, mongeampere
from .errors import ResidualError, SchemaError
from .series import TruncatedSeries, as_rational, rational_sqrt, series_from_json, series_to_json


# ---------------------------------------------------------------------- projection
@dataclass(frozen=True)
class ScaledPoint:
    """The point ``vector / sqrt(radicand)`` when the root is irrational."""

    vector: tuple
    radicand: Fraction

    def __str__(self):
        inner = ", ".join(str(v) for v in self.vector)
        return f"({inner}) / sqrt({self.radicand})"

    def approx(self) -> tuple:
        r = float(self.radicand) ** 0.5
        return tuple(float(v) / r for v in self.vector)


def stereographic(x, direction: str = "forward"):
    """Forward: x / sqrt(1 - |x|^2) for |x| < 1.  Inverse: (y, -1) / sqrt(1 + |y|^2).

    Returns a tuple of Fractions, or a :class:`ScaledPoint` when the square
    root is irrational.
    """
    x = tuple(as_rational(v) for v in x)
    norm2 = sum(v * v for v in x)
    if direction == "forward":
        s = 1 - norm2
        if s <= 0:
            raise ValueError("forward projection needs |x| < 1")
        vec = x
    elif direction == "inverse":
        s = 1 + norm2
        vec = x + (Fraction(-1),)
    else:
        raise ValueError("direction must be 'forward' or 'inverse'")
    r = rational_sqrt(s)
    if r is None:
        return ScaledPoint(vec, s)
    return tuple(v / r for v in vec)


# ---------------------------------------------------------------------- curves
def _t(order):
    return TruncatedSeries.variable(0, 1, order)


@dataclass(frozen=True)
class SphereCurve:
    """Components gamma^0..gamma^n as univariate series."""

    gamma: tuple

    def __post_init__(self):
        gamma = tuple(self.gamma)
        object.__setattr__(self, "gamma", gamma)
        if len(gamma) < 3:
            raise SchemaError("a sphere curve needs at least 3 components (n >= 2)")
        if any(g.arity != 1 for g in gamma):
            raise SchemaError("curve components must be univariate series")
        N = self.order
        norm = sum((g * g for g in gamma[1:]), gamma[0] * gamma[0])
        if not norm.agrees_with(TruncatedSeries.constant(1, 1, N), N):
            raise SchemaError("curve does not lie on the unit sphere to its truncation order")
        start = [g.constant_term for g in gamma]
        if start != [0] * (len(gamma) - 1) + [-1]:
            raise SchemaError("curve must start at the south pole (0, .., 0, -1)")
        speed = [g.coeff((1,)) for g in gamma]
        if speed != [1] + [0] * (len(gamma) - 1):
            raise SchemaError("curve must have initial velocity (1, 0, .., 0)")

    @property
    def n(self) -> int:
        return len(self.gamma) - 1

    @property
    def order(self) -> int:
        return min(g.order for g in self.gamma)

    @classmethod
    def from_unnormalized(cls, v: Sequence[TruncatedSeries]) -> SphereCurve:
        """gamma = (v, -1) / sqrt(1 + |v|^2)."""
        s = sum((c * c for c in v[1:]), v[0] * v[0]) + 1
        r = s.sqrt().reciprocal()
        return cls(tuple(c * r for c in v) + (-r,))

    @classmethod
    def great_circle(cls, n: int, order: int = 8) -> SphereCurve:
        t = _t(order)
        zero = TruncatedSeries.zero(1, order)
        return cls((t.sin(),) + (zero,) * (n - 1) + (-t.cos(),))

    @classmethod
    def moment(cls, n: int, order: int = 8) -> SphereCurve:
        """Normalization of v(t) = (t, t^2/2, .., t^n/n!)."""
        t = _t(order)
        v, term = [], TruncatedSeries.constant(1, 1, order)
        for j in range(1, n + 1):
            term = (term * t).scale(Fraction(1, j))
            v.append(term)
        return cls.from_unnormalized(v)

    def to_json(self) -> dict:
        return {"n": self.n, "order": self.order, "gamma": [series_to_json(g) for g in self.gamma]}

    @classmethod
    def from_json(cls, doc: Mapping) -> SphereCurve:
        if not isinstance(doc, Mapping):
            raise SchemaError("curve document must be a JSON object")
        try:
            if doc.get("form") == "unnormalized":
                return cls.from_unnormalized([series_from_json(s) for s in doc["v"]])
            curve = cls(tuple(series_from_json(s) for s in doc["gamma"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"curve document needs 'gamma' or form 'unnormalized' with 'v' ({exc})") from exc
        if "n" in doc and int(doc["n"]) != curve.n:
            raise SchemaError(f"curve has {curve.n + 1} components but n = {doc['n']}")
        return curve


@dataclass
class CurveData:
    Gamma: list
    phi: TruncatedSeries
    a: TruncatedSeries
    a_normal: list


def curve_to_cauchy_data(curve: SphereCurve) -> CurveData:
    n = curve.n
    scale = (-curve.gamma[n]).reciprocal()
    Gamma = [curve.gamma[i] * scale for i in range(n)]
    phi = Gamma[0]
    a = phi.antiderivative(0)
    if a.derivative_at_zero([2]) == 0:
        raise SchemaError("projected curve has phi'(0) = 0")
    return CurveData(Gamma, phi, a, Gamma[1:])


def renormalize(Gamma: Sequence[TruncatedSeries]) -> SphereCurve:
    """Inverse of the projection on the level of curves."""
    return SphereCurve.from_unnormalized(Gamma)


# ---------------------------------------------------------------------- construction
@dataclass
class HypersurfaceModel:
    u: TruncatedSeries
    Gamma: list | None = None
    curve: SphereCurve | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.u.arity

    @property
    def order(self) -> int:
        return self.u.order

    def gradient(self):
        return [self.u.derivative(i) for i in range(self.n)]

    def to_json(self) -> dict:
        return {"n": self.n, "order": self.order, "u": series_to_json(self.u),
                "Gamma": None if self.Gamma is None else [series_to_json(g) for g in self.Gamma]}


def gauss_identity_holds(u: TruncatedSeries, Gamma, order: int) -> bool:
    """u_x(x^1, 0, .., 0) = Gamma(x^1) to the given order."""
    return all(u.derivative(i).restrict([0]).truncate(order).agrees_with(Gamma[i].truncate(order), order)
               for i in range(u.arity))


def construct_from_curve(curve: SphereCurve, order: int | None = None) -> HypersurfaceModel:
    """Graph y = u(x) with rank-one Hessian whose gradient traces the projected curve on the x^1 axis."""
    N = curve.order if order is None else order
    if N > curve.order:
        raise SchemaError(f"curve known only to order {curve.order}, need {N}")
    data = curve_to_cauchy_data(curve)
    sol = mongeampere.solve_full(mongeampere.MongeRhs.zero(curve.n), data.a, data.a_normal, N)
    u = sol.u
    profile = mongeampere.hessian_rank_profile(u)
    if not profile.rank_one:
        raise ResidualError(f"constructed hypersurface has {profile.summary()}")
    if not gauss_identity_holds(u, data.Gamma, N - 1):
        raise ResidualError("gradient on the x^1 axis differs from the projected curve")
    return HypersurfaceModel(u, data.Gamma, curve)


# ---------------------------------------------------------------------- nondegeneracy
def _derivative_vector(u: TruncatedSeries, I) -> list:
    """u_{x x^I}(0)."""
    out = []
    for i in range(u.arity):
        e = list(I)
        e[i] += 1
        out.append(u.derivative_at_zero(e))
    return out


def _indices_of_degree(n, j):
    return [I for I in product(range(j + 1), repeat=n) if sum(I) == j]


def span_dimensions(u: TruncatedSeries, j_max: int, pure: bool = False) -> list:
    """rank of {u_{x x^I}(0) : |I| <= j} for j = 0..j_max (only I = m e_1 when pure)."""
    n = u.arity
    rows, dims = [], []
    for j in range(j_max + 1):
        if pure:
            rows.append(_derivative_vector(u, (j,) + (0,) * (n - 1)))
        else:
            rows.extend(_derivative_vector(u, I) for I in _indices_of_degree(n, j))
        dims.append(linalg.rank(rows))
    return dims


def hyperplane_normals(u: TruncatedSeries, top: int | None = None) -> list:
    """Nullspace of the matrix of all u_{x x^I}(0), |I| <= top (default N - 1)."""
    n = u.arity
    top = u.order - 1 if top is None else top
    rows = []
    for j in range(top + 1):
        rows.extend(_derivative_vector(u, I) for I in _indices_of_degree(n, j))
    rows = [r for r in rows if any(r)]
    return linalg.nullspace(rows, n)


@dataclass
class NondegeneracyReport:
    n: int
    j_max: int
    span_dims: list
    reduced_dims: list | None
    l: int | None
    contained: bool
    normals: list
    rank_one: bool
    levi_form_rank: int
    levi_verdict: str
    notes: list = field(default_factory=list)

    def summary(self) -> str:
        if self.l is not None:
            head = f"l = {self.l} at 0"
        else:
            head = f"not finitely nondegenerate at 0 up to j = {self.j_max}"
        parts = [head, f"Levi number verdict: {self.levi_verdict}"]
        if self.contained:
            parts.append("image in hyperplane with normals "
                         + ", ".join("(" + ", ".join(str(v) for v in w) + ")" for w in self.normals))
        return "; ".join(parts)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "j_max": self.j_max,
            "span_dims": self.span_dims,
            "reduced_dims": self.reduced_dims,
            "l": self.l,
            "hyperplane_contained": self.contained,
            "normals": [[str(v) for v in w] for w in self.normals],
            "rank_one": self.rank_one,
            "levi_form_rank": self.levi_form_rank,
            "levi_verdict": self.levi_verdict,
            "summary": self.summary(),
            "notes": list(self.notes),
        }


def nondegeneracy_analysis(model, j_max: int | None = None) -> NondegeneracyReport:
    """Span dimensions of the derivative vectors at 0, hyperplane test and Levi-number verdict."""
    u = model.u if isinstance(model, HypersurfaceModel) else model
    n, N = u.arity, u.order
    if j_max is None:
        j_max = N - 1
    if j_max > N - 1:
        raise ValueError(f"j_max = {j_max} needs derivatives beyond the truncation order {N}")
    dims = span_dimensions(u, j_max)
    notes = ["spans and hyperplane test are exact up to the truncation order"]
    rank_one = False
    reduced = None
    if u.derivative_at_zero([2] + [0] * (n - 1)) != 0 and N >= 2:
        rank_one = mongeampere.hessian_rank_profile(u).rank_one
    if rank_one:
        reduced = span_dimensions(u, j_max, pure=True)
        if reduced != dims:
            raise ResidualError(f"pure x^1 spans {reduced} differ from full spans {dims} "
                                "for a rank-one Hessian")
    l = next((j for j, d in enumerate(dims) if d == n), None)
    normals = hyperplane_normals(u)
    contained = bool(normals)
    hess = [[u.derivative_at_zero([int(q == i) + int(q == k) for q in range(n)]) for k in range(n)]
            for i in range(n)]
    levi_rank = linalg.rank(hess)
    if l is not None and contained:
        raise ResidualError("derivative vectors span R^n yet a hyperplane contains them")
    if l is None:
        verdict = "degenerate (image in a hyperplane)" if contained else "undetermined"
    elif rank_one:
        verdict = "n"
        notes.append("Levi number n follows for rank-one Hessian with image in no hyperplane")
    else:
        verdict = f"l = {l} at 0"
    return NondegeneracyReport(n, j_max, dims, reduced, l, contained, normals, rank_one,
                               levi_rank, verdict, notes)


def data_vectors(a: TruncatedSeries, a_normal: Sequence[TruncatedSeries], m_max: int) -> list:
    """(a^(m)(0), a_alpha^(m-1)(0)) for m = 1..m_max."""
    out = []
    for m in range(1, m_max + 1):
        out.append([a.derivative_at_zero([m])] + [s.derivative_at_zero([m - 1]) for s in a_normal])
    return out


def data_nondegeneracy(a, a_normal, m_max: int):
    """(span dims for m = 1..m_max, least m with full span or None) from the Cauchy data alone."""
    vecs = data_vectors(a, a_normal, m_max)
    n = 1 + len(a_normal)
    dims = [linalg.rank(vecs[:m]) for m in range(1, m_max + 1)]
    l = next((m for m, d in zip(range(1, m_max + 1), dims) if d == n), None)
    return dims, l
