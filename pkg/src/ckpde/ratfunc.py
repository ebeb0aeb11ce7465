"""Sparse multivariate polynomials and rational functions used for identity testing.

Only what the symbolic compatibility checks need: ring operations, a zero
test and conversion from/to :mod:`ckpde.expr` trees.  Fractions are never
reduced by a polynomial gcd; a rational function is zero iff its numerator
expands to zero, which is all the checks rely on.  Monomial denominators
are kept normalized so the Monge-Ampere systems (powers of ``pd[1][1]``)
stay small.
"""
from __future__ import annotations

from fractions import Fraction

from . import expr as ex
from .errors import NotRationalError


def _var_key(v: ex.Var):
    return (v.kind, v.index)


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for k, e in m2:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def _mono_div(m1, m2):
    """m1 / m2 assuming m2 divides m1."""
    d = dict(m1)
    for k, e in m2:
        left = d[k] - e
        if left:
            d[k] = left
        else:
            del d[k]
    return tuple(sorted(d.items()))


def _mono_gcd(m1, m2):
    d2 = dict(m2)
    return tuple(sorted((k, min(e, d2[k])) for k, e in m1 if k in d2))


def _mono_lcm(m1, m2):
    d = dict(m1)
    for k, e in m2:
        d[k] = max(d.get(k, 0), e)
    return tuple(sorted(d.items()))


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @classmethod
    def const(cls, c):
        return cls({(): Fraction(c)})

    @classmethod
    def var(cls, v: ex.Var):
        return cls({((_var_key(v), 1),): Fraction(1)})

    def is_zero(self):
        return not self.terms

    def is_const(self):
        return all(m == () for m in self.terms)

    def monomial(self):
        """(coefficient, monomial) when this is a single term, else None."""
        if len(self.terms) != 1:
            return None
        (m, c), = self.terms.items()
        return c, m

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    def scale(self, c):
        return Poly({m: v * c for m, v in self.terms.items()})

    def mono_scale(self, c, mono):
        return Poly({_mono_mul(m, mono): v * c for m, v in self.terms.items()})

    def mono_divide(self, mono):
        return Poly({_mono_div(m, mono): v for m, v in self.terms.items()})

    def content_monomial(self):
        """Largest monomial dividing every term."""
        it = iter(self.terms)
        g = next(it, ())
        for m in it:
            if not g:
                break
            g = _mono_gcd(g, m)
        return g

    def __pow__(self, k):
        out = Poly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def degree_in(self, v: ex.Var) -> int:
        key = _var_key(v)
        return max((dict(m).get(key, 0) for m in self.terms), default=0)

    def to_expression(self) -> ex.Expression:
        out = ex.ZERO
        for m in sorted(self.terms, key=lambda mono: (sum(e for _, e in mono), mono)):
            term = ex.Const(self.terms[m])
            factor = ex.ONE
            for (kind, index), e in m:
                factor = ex.mul(factor, ex.power(ex.Var(kind, index), e))
            out = ex.add(out, ex.mul(term, factor))
        return out


class RatFunc:
    """num / den with both sides polynomials and den nonzero."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        if den is None:
            den = Poly.const(1)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        single = den.monomial()
        if single is not None:
            c, mono = single
            num = num.scale(1 / c)
            den = Poly({mono: Fraction(1)})
            if mono and not num.is_zero():
                g = _mono_gcd(num.content_monomial(), mono)
                if g:
                    num = num.mono_divide(g)
                    den = Poly({_mono_div(mono, g): Fraction(1)})
        self.num = num
        self.den = den

    @classmethod
    def const(cls, c):
        return cls(Poly.const(c))

    def is_zero(self):
        return self.num.is_zero()

    def _den_mono(self):
        single = self.den.monomial()
        return single[1] if single is not None else None

    def __add__(self, other):
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        m1, m2 = self._den_mono(), other._den_mono()
        if m1 is not None and m2 is not None:
            lcm = _mono_lcm(m1, m2)
            n1 = self.num.mono_scale(1, _mono_div(lcm, m1))
            n2 = other.num.mono_scale(1, _mono_div(lcm, m2))
            return RatFunc(n1 + n2, Poly({lcm: Fraction(1)}))
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if self.is_zero() or other.is_zero():
            return RatFunc.const(0)
        return RatFunc(self.num * other.num, self.den * other.den)

    def __truediv__(self, other):
        if other.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __pow__(self, k):
        return RatFunc(self.num ** k, self.den ** k)

    def equals(self, other) -> bool:
        return (self - other).is_zero()

    def to_expression(self) -> ex.Expression:
        num = self.num.to_expression()
        if self.den == Poly.const(1):
            return num
        return ex.div(num, self.den.to_expression())

    def __str__(self):
        return ex.to_text(self.to_expression())


def from_expression(e: ex.Expression, memo: dict | None = None) -> RatFunc:
    """Convert a primitive-free expression; raises NotRationalError otherwise."""
    memo = {} if memo is None else memo

    def go(node):
        key = id(node)
        hit = memo.get(key)
        if hit is not None and hit[0] is node:
            return hit[1]
        if isinstance(node, ex.Const):
            out = RatFunc.const(node.value)
        elif isinstance(node, ex.Var):
            out = RatFunc(Poly.var(node))
        elif isinstance(node, ex.Add):
            out = go(node.left) + go(node.right)
        elif isinstance(node, ex.Mul):
            out = go(node.left) * go(node.right)
        elif isinstance(node, ex.Div):
            out = go(node.left) / go(node.right)
        elif isinstance(node, ex.Pow):
            out = go(node.base) ** node.exponent
        elif isinstance(node, ex.Call):
            raise NotRationalError(f"{node.name}(...) is not a rational function")
        else:
            raise TypeError(f"not an expression: {node!r}")
        memo[key] = (node, out)
        return out

    return go(e)


def is_identically_zero(e: ex.Expression) -> bool:
    return from_expression(e).is_zero()
