"""Compatibility tensors Phi and Psi of a first-order system and their symmetry tests.

For a system ``u^A_alpha = F^A_alpha(x, u, u_Lambda)`` the solvability of the
Cauchy problem for every initial datum is equivalent to

    Phi^A_{alpha beta} = Phi^A_{beta alpha},
    Psi^{A Gamma Lambda}_{alpha beta C} = Psi^{A Gamma Lambda}_{beta alpha C},

where (summing over repeated B, C, Gamma)

    Phi^A_{ab}  = F^A_{a,x^b} + F^A_{a,p^B} F^B_b
                  + F^A_{a,p^B_G} (F^B_{b,x^G} + F^B_{b,p^C} p^C_G)
    Psi^{AGL}_{abC} = F^A_{a,p^B_G} F^B_{b,p^C_L} + F^A_{a,p^B_L} F^B_{b,p^C_G}.

:func:`check_compatibility` tests the symmetries exactly at sample points and,
for rational right-hand sides, as identities of rational functions.  When an
analytic primitive is present the identity test is replaced by a Taylor
expansion of the differences at the base point, which only certifies the
germ there.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import expr as ex
from . import ratfunc
from .errors import CKError, GuardViolationError, InadmissibleValueError, NotRationalError
from .series import TruncatedSeries
from .system import SystemSpec


# ---------------------------------------------------------------------- tensors at a point
def _point_derivatives(sys: SystemSpec, env):
    """Values of F and its first partials at a point, keyed by 1-based indices."""
    cache = {}
    val = lambda e: ex.evaluate_point(e, env, cache)
    F, Fx, Fp, Fpd = {}, {}, {}, {}
    for a in sys.components:
        for al in sys.normal:
            F[a, al] = val(sys.rhs(a, al))
            for i in range(1, sys.n + 1):
                Fx[a, al, i] = val(sys.dx(a, al, i))
            for b in sys.components:
                Fp[a, al, b] = val(sys.dp(a, al, b))
                for lam in sys.tangential:
                    Fpd[a, al, b, lam] = val(sys.dpd(a, al, b, lam))
    return F, Fx, Fp, Fpd


def _resolve_point(sys: SystemSpec, point):
    if point is None:
        return sys.base_point()
    x, p, pprime = point
    return tuple(x), tuple(p), tuple(tuple(r) for r in pprime)


def phi_psi(sys: SystemSpec, point=None):
    """Exact Phi and Psi at ``point = (x, p, p')`` (defaults to the base point).

    Returns two dicts keyed ``(A, alpha, beta)`` and ``(A, Gamma, Lambda, alpha, beta, C)``.
    """
    x, p, pprime = _resolve_point(sys, point)
    env = sys.point_env(x, p, pprime)
    sys.check_guards(env)
    try:
        F, Fx, Fp, Fpd = _point_derivatives(sys, env)
    except InadmissibleValueError as exc:
        raise GuardViolationError(f"right-hand side is not defined at the point: {exc}",
                                  guard=exc.guard, point=(x, p, pprime)) from exc
    A_, N_, T_ = sys.components, sys.normal, sys.tangential
    phi = {}
    for a in A_:
        for al in N_:
            for be in N_:
                v = Fx[a, al, be]
                for b in A_:
                    v += Fp[a, al, b] * F[b, be]
                    for g in T_:
                        inner = Fx[b, be, g]
                        for c in A_:
                            inner += Fp[b, be, c] * pprime[c - 1][g - 1]
                        v += Fpd[a, al, b, g] * inner
                phi[a, al, be] = v
    psi = {}
    for a in A_:
        for g in T_:
            for lam in T_:
                for al in N_:
                    for be in N_:
                        for c in A_:
                            psi[a, g, lam, al, be, c] = sum(
                                (Fpd[a, al, b, g] * Fpd[b, be, c, lam]
                                 + Fpd[a, al, b, lam] * Fpd[b, be, c, g] for b in A_),
                                Fraction(0))
    return phi, psi


def phi_psi_expressions(sys: SystemSpec):
    """Phi and Psi as expression trees in x, p, pd (shared subtrees, no simplification)."""
    A_, N_, T_ = sys.components, sys.normal, sys.tangential
    phi = {}
    for a in A_:
        for al in N_:
            for be in N_:
                terms = [sys.dx(a, al, be)]
                for b in A_:
                    terms.append(ex.mul(sys.dp(a, al, b), sys.rhs(b, be)))
                    for g in T_:
                        inner = ex.total([sys.dx(b, be, g)] + [
                            ex.mul(sys.dp(b, be, c), ex.pd(c, g)) for c in A_])
                        terms.append(ex.mul(sys.dpd(a, al, b, g), inner))
                phi[a, al, be] = ex.total(terms)
    psi = {}
    for a in A_:
        for g in T_:
            for lam in T_:
                for al in N_:
                    for be in N_:
                        for c in A_:
                            psi[a, g, lam, al, be, c] = ex.total(
                                ex.add(ex.mul(sys.dpd(a, al, b, g), sys.dpd(b, be, c, lam)),
                                       ex.mul(sys.dpd(a, al, b, lam), sys.dpd(b, be, c, g)))
                                for b in A_)
    return phi, psi


def asymmetries(phi: Mapping, psi: Mapping):
    """Yield (kind, key, swapped key) for each unordered alpha/beta pair."""
    for (a, al, be) in phi:
        if al < be:
            yield "phi", (a, al, be), (a, be, al)
    for (a, g, lam, al, be, c) in psi:
        if al < be:
            yield "psi", (a, g, lam, al, be, c), (a, g, lam, be, al, c)


# ---------------------------------------------------------------------- report
@dataclass
class Witness:
    kind: str
    indices: tuple
    point: tuple | None
    difference: object

    def label(self) -> str:
        if self.kind == "phi":
            a, al, be = self.indices
            return f"Phi^{a}_{al}{be} - Phi^{a}_{be}{al}"
        a, g, lam, al, be, c = self.indices
        return f"Psi^{a}{g}{lam}_{al}{be}{c} - Psi^{a}{g}{lam}_{be}{al}{c}"

    def to_json(self) -> dict:
        pt = None
        if self.point is not None:
            x, p, pp = self.point
            pt = {"x": [str(v) for v in x], "p": [str(v) for v in p],
                  "pprime": [[str(v) for v in r] for r in pp]}
        return {"kind": self.kind, "indices": list(self.indices), "label": self.label(),
                "point": pt, "difference": str(self.difference)}


@dataclass
class CompatReport:
    points: list
    tensors: list
    witnesses: list
    seed: int
    symbolic_verdict: str | None = None
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "violated" if self.witnesses else "compatible-at-samples"

    @property
    def compatible(self) -> bool:
        return not self.witnesses

    @property
    def sample_witnesses(self) -> list:
        return [w for w in self.witnesses if w.point is not None]

    def summary(self) -> str:
        if self.witnesses:
            w = self.witnesses[0]
            return f"violated: {w.label()} = {w.difference}"
        if self.symbolic_verdict == "identities hold":
            return "compatible (symbolic)"
        if self.symbolic_verdict:
            return f"compatible ({self.symbolic_verdict})"
        return "compatible at samples"

    def to_json(self) -> dict:
        pts = []
        for (x, p, pp), (phi, psi) in zip(self.points, self.tensors):
            pts.append({
                "x": [str(v) for v in x], "p": [str(v) for v in p],
                "pprime": [[str(v) for v in r] for r in pp],
                "phi": {",".join(map(str, k)): str(v) for k, v in sorted(phi.items())},
                "psi": {",".join(map(str, k)): str(v) for k, v in sorted(psi.items())},
            })
        return {
            "verdict": self.verdict,
            "summary": self.summary(),
            "symbolic_verdict": self.symbolic_verdict,
            "seed": self.seed,
            "samples": len(self.points),
            "points": pts,
            "witnesses": [w.to_json() for w in self.witnesses],
            "notes": list(self.notes),
        }


def _random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-4, 4), rng.randint(1, 3))


def _sample_point(sys: SystemSpec, rng: random.Random):
    x = tuple(v + _random_rational(rng) for v in sys.x0)
    p = tuple(v + _random_rational(rng) for v in sys.p0)
    pp = tuple(tuple(v + _random_rational(rng) for v in row) for row in sys.pprime0)
    return x, p, pp


def sample_points(sys: SystemSpec, samples: int, seed: int = 0, max_tries: int | None = None):
    """Base point plus ``samples - 1`` guard-satisfying pseudorandom points, and a shortfall note."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = random.Random(seed)
    points = [sys.base_point()]
    tries = 0
    max_tries = max_tries if max_tries is not None else 50 * samples
    while len(points) < samples and tries < max_tries:
        tries += 1
        pt = _sample_point(sys, rng)
        try:
            phi_psi(sys, pt)
        except (GuardViolationError, InadmissibleValueError, ZeroDivisionError):
            continue
        points.append(pt)
    return points


def _symbolic_check(sys: SystemSpec, germ_order: int):
    """Return (verdict label, witnesses) from the identity or germ test."""
    phi_e, psi_e = phi_psi_expressions(sys)
    tensors = {"phi": phi_e, "psi": psi_e}
    witnesses = []
    if sys.is_rational():
        memo = {}
        for kind, key, swapped in asymmetries(phi_e, psi_e):
            diff = ratfunc.from_expression(tensors[kind][key], memo) - ratfunc.from_expression(
                tensors[kind][swapped], memo)
            if not diff.is_zero():
                witnesses.append(Witness(kind, key, None, ex.to_text(diff.to_expression())))
        return ("identities fail" if witnesses else "identities hold"), witnesses
    # germ test: expand the differences in the variables that actually occur
    used = set()
    for kind, key, swapped in asymmetries(phi_e, psi_e):
        used |= ex.variables(tensors[kind][key]) | ex.variables(tensors[kind][swapped])
    used = sorted(used, key=lambda v: (v.kind, v.index))
    base = sys.point_env()
    env = {}
    for j, v in enumerate(used):
        env[v] = TruncatedSeries.variable(j, len(used), germ_order) + base[v]
    cache = {}
    for kind, key, swapped in asymmetries(phi_e, psi_e):
        d = ex.sub(tensors[kind][key], tensors[kind][swapped])
        try:
            s = ex.evaluate(d, env, len(used), germ_order, cache)
        except InadmissibleValueError as exc:
            raise GuardViolationError(f"germ expansion failed at the base point: {exc}") from exc
        if not s.is_zero():
            witnesses.append(Witness(kind, key, None, f"germ term {s.lowest_term()}"))
    label = "germ-at-base-point: differences vanish" if not witnesses else "germ-at-base-point: fails"
    return label, witnesses


def check_compatibility(sys: SystemSpec, samples: int = 16, seed: int = 0, symbolic: bool = True,
                        order: int = 8, germ_order: int | None = None) -> CompatReport:
    """Sample and (optionally) symbolic test of the two symmetry conditions.

    The first sample is always the base point.  For systems containing
    analytic primitives most random points are outside the set where the
    primitives have exact rational values; those are rejected, and the report
    notes any shortfall instead of failing.
    """
    points = sample_points(sys, samples, seed)
    notes = []
    if len(points) < samples:
        if sys.is_rational():
            raise GuardViolationError(
                f"could only find {len(points)} of {samples} admissible sample points")
        notes.append(f"only {len(points)} of {samples} sample points admissible "
                     "(analytic primitives need exact rational values)")
    tensors, witnesses = [], []
    for pt in points:
        phi, psi = phi_psi(sys, pt)
        for (a, g, lam, al, be, c), v in psi.items():
            if v != psi[a, lam, g, al, be, c]:
                raise CKError("Psi is not symmetric under Gamma <-> Lambda")
        tensors.append((phi, psi))
        table = {"phi": phi, "psi": psi}
        for kind, key, swapped in asymmetries(phi, psi):
            d = table[kind][key] - table[kind][swapped]
            if d:
                witnesses.append(Witness(kind, key, pt, d))
    verdict = None
    if symbolic:
        germ_order = 2 * order if germ_order is None else germ_order
        verdict, sym_witnesses = _symbolic_check(sys, germ_order)
        witnesses.extend(sym_witnesses)
    return CompatReport(points, tensors, witnesses, seed, verdict, notes)


def compatible_at(sys: SystemSpec, point=None) -> bool:
    """Pointwise symmetry of Phi and Psi."""
    phi, psi = phi_psi(sys, point)
    table = {"phi": phi, "psi": psi}
    return all(table[k][a] == table[k][b] for k, a, b in asymmetries(phi, psi))


# ---------------------------------------------------------------------- linear vector fields
@dataclass(frozen=True)
class LinearFieldSystem:
    """Operators ``L_alpha u^A = d_alpha u^A + xi^{A L}_{alpha B}(x) d_L u^B``.

    ``xi`` maps ``(A, L, alpha, B)`` to an expression in ``x`` only; missing
    entries are zero.
    """

    n: int
    k: int
    m: int
    xi: Mapping

    def __post_init__(self):
        clean = {}
        for key, e in dict(self.xi).items():
            a, lam, al, b = key
            if not (1 <= a <= self.m and 1 <= b <= self.m and 1 <= lam <= self.k
                    and self.k < al <= self.n):
                raise ValueError(f"coefficient index {key} out of range")
            if isinstance(e, str):
                e = ex.parse(e, {"n": self.n, "k": self.k, "m": self.m})
            if any(v.kind != "x" for v in ex.variables(e)):
                raise ValueError("vector field coefficients may depend on x only")
            if not ex.is_const(e, 0):
                clean[key] = e
        object.__setattr__(self, "xi", clean)

    def coeff(self, a, lam, al, b) -> ex.Expression:
        return self.xi.get((a, lam, al, b), ex.ZERO)

    def field_components(self, al, a, b) -> dict:
        """Coefficients (by x-index) of the scalar vector field L^A_{alpha B}."""
        comps = {}
        if a == b:
            comps[al] = ex.ONE
        for lam in range(1, self.k + 1):
            c = self.coeff(a, lam, al, b)
            if not ex.is_const(c, 0):
                comps[lam] = c
        return comps


def from_linear_fields(lf: LinearFieldSystem, **base) -> SystemSpec:
    """Solve ``L_alpha u = 0`` for the normal derivatives: F^A_alpha = -xi^{AL}_{alpha B} p^B_L."""
    F = {}
    for a in range(1, lf.m + 1):
        for al in range(lf.k + 1, lf.n + 1):
            F[a, al] = ex.neg(ex.total(ex.mul(lf.coeff(a, lam, al, b), ex.pd(b, lam))
                                       for b in range(1, lf.m + 1) for lam in range(1, lf.k + 1)))
    return SystemSpec(lf.n, lf.k, lf.m, F, **base)


def _compose_fields(X: dict, Y: dict, n: int):
    """Second-order operator X o Y as (first-order part, symmetric second-order part)."""
    first, second = {}, {}
    for i, xi in X.items():
        for j, yj in Y.items():
            key = (min(i, j), max(i, j))
            second[key] = ex.add(second.get(key, ex.ZERO), ex.mul(xi, yj))
    for j, yj in Y.items():
        term = ex.total(ex.mul(xi, ex.differentiate(yj, ex.x(i))) for i, xi in X.items())
        first[j] = ex.add(first.get(j, ex.ZERO), term)
    return first, second


def bracket_terms(lf: LinearFieldSystem) -> dict:
    """All coefficient expressions of the commutators [L_alpha, L_beta], alpha < beta."""
    out = {}
    for al in range(lf.k + 1, lf.n + 1):
        for be in range(al + 1, lf.n + 1):
            for a in range(1, lf.m + 1):
                for c in range(1, lf.m + 1):
                    acc = {}
                    for b in range(1, lf.m + 1):
                        for sign, (u, v) in ((1, (al, be)), (-1, (be, al))):
                            X = lf.field_components(u, a, b)
                            Y = lf.field_components(v, b, c)
                            first, second = _compose_fields(X, Y, lf.n)
                            for j, e in first.items():
                                key = ("d", j)
                                acc[key] = ex.add(acc.get(key, ex.ZERO), e if sign > 0 else ex.neg(e))
                            for ij, e in second.items():
                                key = ("dd",) + ij
                                acc[key] = ex.add(acc.get(key, ex.ZERO), e if sign > 0 else ex.neg(e))
                    for key, e in acc.items():
                        out[(al, be, a, c) + key] = e
    return out


def bracket_check(lf: LinearFieldSystem) -> bool:
    """True iff every commutator [L_alpha, L_beta] vanishes identically."""
    memo = {}
    for e in bracket_terms(lf).values():
        try:
            if not ratfunc.from_expression(e, memo).is_zero():
                return False
        except NotRationalError:
            raise ValueError("bracket_check needs rational coefficients") from None
    return True
