"""First-order overdetermined systems ``u^A_alpha = F^A_alpha(x, u, u_Lambda)``.

Index conventions (all 1-based, as in the expression language):
``i`` runs over 1..n, tangential ``L`` over 1..k, normal ``alpha`` over k+1..n
and ``A`` over 1..m.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from . import expr as ex
from .errors import GuardViolationError, InadmissibleValueError, SchemaError
from .series import as_rational


def _rat(value, where):
    try:
        if isinstance(value, str):
            return Fraction(value.strip())
        return as_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{where}: expected an exact rational, got {value!r}") from exc


@dataclass(frozen=True, eq=False)
class SystemSpec:
    n: int
    k: int
    m: int
    F: Mapping
    x0: tuple = ()
    p0: tuple = ()
    pprime0: tuple = ()
    guards: tuple = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        n, k, m = self.n, self.k, self.m
        if not (isinstance(n, int) and isinstance(k, int) and isinstance(m, int)):
            raise SchemaError("n, k, m must be integers")
        if k < 1 or m < 1 or k >= n:
            raise SchemaError(f"need 1 <= k < n and m >= 1, got n={n}, k={k}, m={m}")
        F = {}
        for key, e in dict(self.F).items():
            a, alpha = key
            if not (1 <= a <= m and k < alpha <= n):
                raise SchemaError(f"right-hand side index (A={a}, alpha={alpha}) out of range")
            if isinstance(e, str):
                e = ex.parse(e, self)
            ex.check_bounds(e, self)
            F[(a, alpha)] = e
        for a in range(1, m + 1):
            for alpha in range(k + 1, n + 1):
                if (a, alpha) not in F:
                    raise SchemaError(f"missing right-hand side for A={a}, alpha={alpha}")
        object.__setattr__(self, "F", F)
        x0 = tuple(_rat(v, "x0") for v in (self.x0 or [0] * n))
        p0 = tuple(_rat(v, "p0") for v in (self.p0 or [0] * m))
        pp = self.pprime0 or [[0] * k for _ in range(m)]
        pp = tuple(tuple(_rat(v, "pprime0") for v in row) for row in pp)
        if len(x0) != n or len(p0) != m or len(pp) != m or any(len(r) != k for r in pp):
            raise SchemaError("base point has the wrong shape: need x0 (n), p0 (m), pprime0 (m x k)")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "pprime0", pp)
        guards = []
        for g in self.guards:
            if isinstance(g, str):
                g = ex.parse(g, self)
            ex.check_bounds(g, self)
            guards.append(g)
        object.__setattr__(self, "guards", tuple(guards))
        if guards:
            self.check_guards(self.point_env())

    # ------------------------------------------------------------------ index helpers
    @property
    def tangential(self) -> range:
        return range(1, self.k + 1)

    @property
    def normal(self) -> range:
        return range(self.k + 1, self.n + 1)

    @property
    def components(self) -> range:
        return range(1, self.m + 1)

    def rhs(self, a: int, alpha: int) -> ex.Expression:
        return self.F[(a, alpha)]

    def is_rational(self) -> bool:
        return all(ex.is_rational(e) for e in self.F.values()) and all(
            ex.is_rational(g) for g in self.guards)

    def derivative(self, a: int, alpha: int, v: ex.Var) -> ex.Expression:
        """Cached symbolic partial derivative of F^a_alpha."""
        key = (a, alpha, v)
        hit = self._cache.get(key)
        if hit is None:
            hit = ex.differentiate(self.F[(a, alpha)], v)
            self._cache[key] = hit
        return hit

    def dx(self, a, alpha, i):
        return self.derivative(a, alpha, ex.x(i))

    def dp(self, a, alpha, b):
        return self.derivative(a, alpha, ex.p(b))

    def dpd(self, a, alpha, b, lam):
        return self.derivative(a, alpha, ex.pd(b, lam))

    # ------------------------------------------------------------------ points
    def point_env(self, x=None, p=None, pprime=None) -> dict:
        x = self.x0 if x is None else x
        p = self.p0 if p is None else p
        pprime = self.pprime0 if pprime is None else pprime
        env = {}
        for i, v in enumerate(x, start=1):
            env[ex.x(i)] = as_rational(v)
        for a, v in enumerate(p, start=1):
            env[ex.p(a)] = as_rational(v)
        for a, row in enumerate(pprime, start=1):
            for lam, v in enumerate(row, start=1):
                env[ex.pd(a, lam)] = as_rational(v)
        return env

    def base_point(self):
        return (self.x0, self.p0, self.pprime0)

    def check_guards(self, env) -> None:
        for g in self.guards:
            try:
                val = ex.evaluate_point(g, env)
            except InadmissibleValueError as exc:
                raise GuardViolationError(f"guard {ex.to_text(g)} cannot be evaluated: {exc}",
                                          guard=ex.to_text(g)) from exc
            if val == 0:
                raise GuardViolationError(f"guard {ex.to_text(g)} vanishes at the point",
                                          guard=ex.to_text(g))

    def with_base_point(self, x0=None, p0=None, pprime0=None) -> SystemSpec:
        return SystemSpec(self.n, self.k, self.m, self.F,
                          tuple(self.x0 if x0 is None else x0),
                          tuple(self.p0 if p0 is None else p0),
                          tuple(tuple(r) for r in (self.pprime0 if pprime0 is None else pprime0)),
                          self.guards)

    def dims(self) -> dict:
        return {"n": self.n, "k": self.k, "m": self.m}

    # ------------------------------------------------------------------ JSON
    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "m": self.m,
            "x0": [str(v) for v in self.x0],
            "p0": [str(v) for v in self.p0],
            "pprime0": [[str(v) for v in row] for row in self.pprime0],
            "F": [{"A": a, "alpha": alpha, "expr": ex.to_text(self.F[(a, alpha)])}
                  for (a, alpha) in sorted(self.F)],
            "guards": [ex.to_text(g) for g in self.guards],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> SystemSpec:
        if not isinstance(doc, Mapping):
            raise SchemaError("system document must be a JSON object")
        try:
            n, k, m = int(doc["n"]), int(doc["k"]), int(doc["m"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"system document needs integer n, k, m ({exc})") from exc
        dims = {"n": n, "k": k, "m": m}
        F = {}
        entries = doc.get("F")
        if not isinstance(entries, Sequence) or isinstance(entries, str):
            raise SchemaError("system document needs a list 'F'")
        for pos, item in enumerate(entries):
            try:
                a, alpha, text = int(item["A"]), int(item["alpha"]), item["expr"]
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f"F[{pos}]: need keys A, alpha, expr ({exc})") from exc
            if (a, alpha) in F:
                raise SchemaError(f"F[{pos}]: duplicate entry for A={a}, alpha={alpha}")
            F[(a, alpha)] = ex.parse(text, dims)
        guards = tuple(ex.parse(g, dims) for g in doc.get("guards", []))
        return cls(n, k, m, F, tuple(doc.get("x0", ())), tuple(doc.get("p0", ())),
                   tuple(tuple(r) for r in doc.get("pprime0", ())), guards)


def build(n: int, k: int, m: int, rhs: Mapping, **kwargs) -> SystemSpec:
    """Convenience constructor taking ``{(A, alpha): "expr text"}``."""
    return SystemSpec(n, k, m, dict(rhs), **kwargs)
