"""Exact truncated multivariate power series.

A :class:`TruncatedSeries` is a polynomial in ``arity`` variables with
:class:`fractions.Fraction` coefficients, known up to (and including) total
degree ``order``.  All series are germs at the origin; callers translate base
points before building them.  Variables are indexed from 0.

    >>> x = TruncatedSeries.variable(0, arity=1, order=3)
    >>> (1 - x).reciprocal()
    1 + x1 + x1^2 + x1^3 + O(4)
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import ArityMismatchError, InadmissibleValueError

Exponent = tuple


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and strings like ``"3/5"`` to Fraction; floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, float):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f"cannot use {value!r} as an exact rational")


def rational_sqrt(value: Fraction):
    """Exact square root of a nonnegative rational, or None when irrational."""
    value = as_rational(value)
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


@lru_cache(maxsize=None)
def _half_binomial(j: int) -> Fraction:
    # binom(1/2, j)
    out = Fraction(1)
    for i in range(j):
        out *= (Fraction(1, 2) - i) / (i + 1)
    return out


def taylor_coefficients(name: str, base, order: int) -> list:
    """Coefficients of ``name(base + r)`` as a power series in ``r``.

    Only base values at which the primitive takes a rational value with
    rational derivatives are admissible; anything else raises
    :class:`InadmissibleValueError` naming the failed guard.
    """
    base = as_rational(base)
    order = max(order, 0)
    if name == "reciprocal":
        if base == 0:
            raise InadmissibleValueError("nonzero", "reciprocal of a series with zero constant term")
        return [(-1) ** j / base ** (j + 1) for j in range(order + 1)]
    if name == "sqrt":
        if base <= 0:
            raise InadmissibleValueError("positive", f"sqrt needs a positive constant term, got {base}")
        root = rational_sqrt(base)
        if root is None:
            raise InadmissibleValueError("rational-square", f"sqrt of {base} is irrational")
        return [root * _half_binomial(j) / base ** j for j in range(order + 1)]
    if name == "exp":
        if base != 0:
            raise InadmissibleValueError("zero", f"exp needs constant term 0, got {base}")
        return [Fraction(1, math.factorial(j)) for j in range(order + 1)]
    if name == "log":
        if base != 1:
            raise InadmissibleValueError("one", f"log needs constant term 1, got {base}")
        return [Fraction(0)] + [Fraction((-1) ** (j + 1), j) for j in range(1, order + 1)]
    if name == "sin":
        if base != 0:
            raise InadmissibleValueError("zero", f"sin needs constant term 0, got {base}")
        return [Fraction(0) if j % 2 == 0 else Fraction((-1) ** (j // 2), math.factorial(j))
                for j in range(order + 1)]
    if name == "cos":
        if base != 0:
            raise InadmissibleValueError("zero", f"cos needs constant term 0, got {base}")
        return [Fraction((-1) ** (j // 2), math.factorial(j)) if j % 2 == 0 else Fraction(0)
                for j in range(order + 1)]
    raise ValueError(f"unknown analytic primitive {name!r}")


class TruncatedSeries:
    """Sparse multivariate Taylor polynomial with a total-degree cutoff.

    ``order`` may be -1, which denotes a series about which nothing is known
    (for instance the derivative of a constant-only germ).
    """

    __slots__ = ("arity", "order", "_terms", "_by_degree")

    def __init__(self, arity: int, order: int, terms: Mapping | Iterable | None = None):
        if arity < 0:
            raise ValueError("arity must be nonnegative")
        if order < -1:
            raise ValueError("order must be >= -1")
        clean = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for exp, coeff in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != arity:
                raise ArityMismatchError(f"exponent {exp} does not have length {arity}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            if sum(exp) > order:
                continue
            c = clean.get(exp, 0) + as_rational(coeff)
            if c:
                clean[exp] = c
            else:
                clean.pop(exp, None)
        self.arity = arity
        self.order = order
        self._terms = clean
        self._by_degree = None

    @classmethod
    def _raw(cls, arity, order, terms):
        out = cls.__new__(cls)
        out.arity = arity
        out.order = order
        out._terms = terms
        out._by_degree = None
        return out

    # ------------------------------------------------------------------ constructors
    @classmethod
    def zero(cls, arity: int, order: int) -> TruncatedSeries:
        return cls._raw(arity, order, {})

    @classmethod
    def constant(cls, value, arity: int, order: int) -> TruncatedSeries:
        value = as_rational(value)
        terms = {(0,) * arity: value} if value and order >= 0 else {}
        return cls._raw(arity, order, terms)

    @classmethod
    def variable(cls, index: int, arity: int, order: int) -> TruncatedSeries:
        if not 0 <= index < arity:
            raise IndexError(f"variable index {index} out of range for arity {arity}")
        exp = [0] * arity
        exp[index] = 1
        return cls._raw(arity, order, {tuple(exp): Fraction(1)} if order >= 1 else {})

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff=1, order: int = 8) -> TruncatedSeries:
        return cls(len(exp), order, {tuple(exp): coeff})

    @classmethod
    def univariate(cls, coeffs: Sequence, order: int | None = None) -> TruncatedSeries:
        """Build ``sum coeffs[j] t^j`` in one variable."""
        if order is None:
            order = len(coeffs) - 1
        return cls(1, order, {(j,): c for j, c in enumerate(coeffs)})

    # ------------------------------------------------------------------ access
    def coeff(self, exp: Sequence[int]) -> Fraction:
        exp = tuple(exp)
        if len(exp) != self.arity:
            raise ArityMismatchError(f"exponent {exp} does not have length {self.arity}")
        return self._terms.get(exp, Fraction(0))

    def __getitem__(self, exp) -> Fraction:
        if isinstance(exp, int):
            exp = (exp,)
        return self.coeff(exp)

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.arity, Fraction(0))

    def items(self):
        """Terms sorted by (total degree, exponent)."""
        return sorted(self._terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def terms(self) -> dict:
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def lowest_term(self):
        """(exponent, coefficient) of the first nonzero term in degree order, or None."""
        items = self.items()
        return items[0] if items else None

    def derivative_at_zero(self, exp: Sequence[int]) -> Fraction:
        """The partial derivative ``d^exp`` of the germ evaluated at the origin."""
        exp = tuple(exp)
        factor = 1
        for e in exp:
            factor *= math.factorial(e)
        return self.coeff(exp) * factor

    def _degree_buckets(self):
        if self._by_degree is None:
            buckets = sorted(((sum(e), e, c) for e, c in self._terms.items()), key=lambda t: t[0])
            self._by_degree = buckets
        return self._by_degree

    # ------------------------------------------------------------------ comparison
    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.arity == other.arity and self.order == other.order and self._terms == other._terms

    def __hash__(self):
        return hash((self.arity, self.order, frozenset(self._terms.items())))

    def agrees_with(self, other: TruncatedSeries, order: int) -> bool:
        """True when both series have identical coefficients in every degree <= ``order``."""
        if self.arity != other.arity:
            raise ArityMismatchError("cannot compare series of different arity")
        if order > min(self.order, other.order):
            raise ValueError(f"cannot compare to order {order}: series known only to "
                             f"{min(self.order, other.order)}")
        return self.truncate(order)._terms == other.truncate(order)._terms

    # ------------------------------------------------------------------ ring operations
    def _coerce(self, other) -> TruncatedSeries | None:
        if isinstance(other, TruncatedSeries):
            if other.arity != self.arity:
                raise ArityMismatchError(f"arity {self.arity} vs {other.arity}")
            return other
        try:
            value = as_rational(other)
        except TypeError:
            return None
        return TruncatedSeries.constant(value, self.arity, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        order = min(self.order, other.order)
        out = {e: c for e, c in self._terms.items() if sum(e) <= order}
        for e, c in other._terms.items():
            if sum(e) > order:
                continue
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return TruncatedSeries._raw(self.arity, order, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw(self.arity, self.order, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, factor) -> TruncatedSeries:
        factor = as_rational(factor)
        if not factor:
            return TruncatedSeries.zero(self.arity, self.order)
        return TruncatedSeries._raw(self.arity, self.order, {e: c * factor for e, c in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        if other.arity != self.arity:
            raise ArityMismatchError(f"arity {self.arity} vs {other.arity}")
        order = min(self.order, other.order)
        out = {}
        left = self._degree_buckets()
        right = other._degree_buckets()
        for da, ea, ca in left:
            if da > order:
                break
            limit = order - da
            for db, eb, cb in right:
                if db > limit:
                    break
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        return TruncatedSeries._raw(self.arity, order, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.reciprocal()
        try:
            value = as_rational(other)
        except TypeError:
            return NotImplemented
        if value == 0:
            raise ZeroDivisionError("division of a series by zero")
        return self.scale(1 / value)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = TruncatedSeries.constant(1, self.arity, self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def truncate(self, order: int) -> TruncatedSeries:
        if order > self.order:
            raise ValueError(f"cannot raise the order of a series from {self.order} to {order}")
        return TruncatedSeries._raw(self.arity, order,
                                    {e: c for e, c in self._terms.items() if sum(e) <= order})

    # ------------------------------------------------------------------ analytic functions
    def compose_univariate(self, coeffs: Sequence) -> TruncatedSeries:
        """Evaluate ``sum coeffs[j] * (self - c0)^j`` by Horner's rule.

        ``coeffs`` are Taylor coefficients of a univariate function about the
        constant term ``c0`` of this series.
        """
        shifted = self - self.constant_term
        n = min(len(coeffs) - 1, max(self.order, 0))
        result = TruncatedSeries.constant(coeffs[n], self.arity, self.order)
        for j in range(n - 1, -1, -1):
            result = result * shifted + coeffs[j]
        return result

    def apply(self, name: str) -> TruncatedSeries:
        return self.compose_univariate(taylor_coefficients(name, self.constant_term, self.order))

    def reciprocal(self) -> TruncatedSeries:
        return self.apply("reciprocal")

    def sqrt(self) -> TruncatedSeries:
        return self.apply("sqrt")

    def exp(self) -> TruncatedSeries:
        return self.apply("exp")

    def log(self) -> TruncatedSeries:
        return self.apply("log")

    def sin(self) -> TruncatedSeries:
        return self.apply("sin")

    def cos(self) -> TruncatedSeries:
        return self.apply("cos")

    # ------------------------------------------------------------------ calculus
    def derivative(self, index: int) -> TruncatedSeries:
        if not 0 <= index < self.arity:
            raise IndexError(f"variable index {index} out of range for arity {self.arity}")
        out = {}
        for e, c in self._terms.items():
            k = e[index]
            if k:
                new = e[:index] + (k - 1,) + e[index + 1:]
                out[new] = c * k
        return TruncatedSeries._raw(self.arity, self.order - 1, out)

    def antiderivative(self, index: int) -> TruncatedSeries:
        """Integral from 0 in variable ``index``; the result is known to order + 1."""
        if not 0 <= index < self.arity:
            raise IndexError(f"variable index {index} out of range for arity {self.arity}")
        out = {}
        for e, c in self._terms.items():
            k = e[index]
            new = e[:index] + (k + 1,) + e[index + 1:]
            out[new] = c / (k + 1)
        return TruncatedSeries._raw(self.arity, self.order + 1, out)

    def partial(self, exp: Sequence[int]) -> TruncatedSeries:
        out = self
        for i, k in enumerate(exp):
            for _ in range(k):
                out = out.derivative(i)
        return out

    # ------------------------------------------------------------------ substitutions
    def restrict(self, keep: Sequence[int]) -> TruncatedSeries:
        """Set every variable not listed in ``keep`` to zero; result has arity len(keep)."""
        keep = list(keep)
        dropped = [i for i in range(self.arity) if i not in keep]
        out = {}
        for e, c in self._terms.items():
            if any(e[i] for i in dropped):
                continue
            out[tuple(e[i] for i in keep)] = c
        return TruncatedSeries._raw(len(keep), self.order, out)

    def embed(self, arity: int, positions: Sequence[int]) -> TruncatedSeries:
        """View this series as a function of ``arity`` variables; variable j goes to ``positions[j]``."""
        if len(positions) != self.arity:
            raise ArityMismatchError("positions must list one slot per variable")
        out = {}
        for e, c in self._terms.items():
            new = [0] * arity
            for j, p in enumerate(positions):
                new[p] = e[j]
            out[tuple(new)] = c
        return TruncatedSeries._raw(arity, self.order, out)

    def compose(self, substitutions: Sequence[TruncatedSeries]) -> TruncatedSeries:
        """Substitute series with zero constant term for each variable."""
        if len(substitutions) != self.arity:
            raise ArityMismatchError("need one substitution per variable")
        if not substitutions:
            return self
        new_arity = substitutions[0].arity
        order = min([self.order] + [s.order for s in substitutions])
        for s in substitutions:
            if s.arity != new_arity:
                raise ArityMismatchError("substitutions must share an arity")
            if s.constant_term != 0:
                raise InadmissibleValueError("zero", "composition needs substitutions vanishing at 0")
        powers = [[TruncatedSeries.constant(1, new_arity, order)] for _ in substitutions]
        result = TruncatedSeries.zero(new_arity, order)
        for e, c in self.items():
            if sum(e) > order:
                break
            term = TruncatedSeries.constant(c, new_arity, order)
            for i, k in enumerate(e):
                if not k:
                    continue
                cache = powers[i]
                while len(cache) <= k:
                    cache.append(cache[-1] * substitutions[i])
                term = term * cache[k]
            result = result + term
        return result

    def linear_substitute(self, matrix: Sequence[Sequence], new_arity: int | None = None) -> TruncatedSeries:
        """Replace variable i by ``sum_j matrix[i][j] * y_j``."""
        if new_arity is None:
            new_arity = len(matrix[0]) if matrix else 0
        subs = []
        for row in matrix:
            subs.append(TruncatedSeries(new_arity, self.order,
                                        {tuple(1 if q == j else 0 for q in range(new_arity)): a
                                         for j, a in enumerate(row)}))
        return self.compose(subs)

    # ------------------------------------------------------------------ display
    def __repr__(self):
        return self.format()

    def format(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i + 1}" for i in range(self.arity)]
        parts = []
        for e, c in self.items():
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        body = " + ".join(parts) if parts else "0"
        body = body.replace("+ -", "- ")
        return f"{body} + O({self.order + 1})"


def combine(kind: str, s: TruncatedSeries, t: TruncatedSeries) -> TruncatedSeries:
    """Ring operation ``kind`` in {'add', 'sub', 'mul'}; result order is the smaller order."""
    if s.arity != t.arity:
        raise ArityMismatchError(f"arity {s.arity} vs {t.arity}")
    if kind == "add":
        return s + t
    if kind == "sub":
        return s - t
    if kind == "mul":
        return s * t
    raise ValueError(f"unknown operation {kind!r}")


def unary_analytic(kind: str, s: TruncatedSeries) -> TruncatedSeries:
    if kind not in ("reciprocal", "sqrt", "exp", "log", "sin", "cos"):
        raise ValueError(f"unknown analytic operation {kind!r}")
    return s.apply(kind)


def calculus(kind: str, s: TruncatedSeries, index: int) -> TruncatedSeries:
    if kind == "derivative":
        return s.derivative(index)
    if kind == "antiderivative":
        return s.antiderivative(index)
    raise ValueError(f"unknown calculus operation {kind!r}")


# -------------------------------------------------------------------------- JSON
def series_to_json(s: TruncatedSeries) -> dict:
    return {
        "arity": s.arity,
        "order": s.order,
        "terms": [{"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)}
                  for e, c in s.items()],
    }


def series_from_json(doc: Mapping) -> TruncatedSeries:
    try:
        arity = int(doc["arity"])
        order = int(doc["order"])
        terms = {}
        for t in doc.get("terms", []):
            exp = tuple(int(e) for e in t["exp"])
            coeff = Fraction(int(t["num"]), int(t.get("den", "1")))
            terms[exp] = terms.get(exp, 0) + coeff
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed series document: {exc}") from exc
    return TruncatedSeries(arity, order, terms)
