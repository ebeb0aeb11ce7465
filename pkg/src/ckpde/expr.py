"""Expression trees for right-hand sides ``F^A_alpha(x, p, p')``.

Variables are written ``x[i]``, ``p[A]`` and ``pd[A][L]`` with 1-based indices;
the bare symbol ``t`` is accepted only when a caller asks for it (it stands
for ``u_11`` in Monge-Ampere right-hand sides).  Nodes are immutable and are
built through folding constructors (:func:`add`, :func:`mul`, ...) so that
parsing the printed form of an expression gives back the same tree.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .errors import (
    IndexRangeError,
    InadmissibleValueError,
    ParseError,
    UnboundVariableError,
)
from .series import TruncatedSeries, as_rational, rational_sqrt, taylor_coefficients


class Expression:
    """Base class; supports ``+ - * / **`` with other expressions and rationals."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __truediv__(self, other):
        return div(self, _wrap(other))

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, k):
        return power(self, k)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True, repr=False)
class Const(Expression):
    value: Fraction

    def __repr__(self):
        return f"Const({self.value})"


@dataclass(frozen=True, eq=True, repr=False)
class Var(Expression):
    kind: str
    index: tuple

    def __repr__(self):
        return f"Var({to_text(self)})"


@dataclass(frozen=True, eq=True, repr=False)
class Add(Expression):
    left: Expression
    right: Expression

    def __repr__(self):
        return f"Add({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Mul(Expression):
    left: Expression
    right: Expression

    def __repr__(self):
        return f"Mul({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Div(Expression):
    left: Expression
    right: Expression

    def __repr__(self):
        return f"Div({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Pow(Expression):
    base: Expression
    exponent: int

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exponent})"


@dataclass(frozen=True, eq=True, repr=False)
class Call(Expression):
    name: str
    arg: Expression

    def __repr__(self):
        return f"Call({self.name}, {self.arg!r})"


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
MINUS_ONE = Const(Fraction(-1))
T = Var("t", ())


def const(value) -> Const:
    return Const(as_rational(value))


def x(i: int) -> Var:
    return Var("x", (i,))


def p(a: int) -> Var:
    return Var("p", (a,))


def pd(a: int, lam: int) -> Var:
    return Var("pd", (a, lam))


def _wrap(value) -> Expression:
    if isinstance(value, Expression):
        return value
    return const(value)


def is_const(e, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# ---------------------------------------------------------------------- folding builders
def add(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if is_const(a, 0):
        return b
    if is_const(b, 0):
        return a
    return Add(a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if is_const(a, 0) or is_const(b, 0):
        return ZERO
    if is_const(a, 1):
        return b
    if is_const(b, 1):
        return a
    if isinstance(b, Const):
        a, b = b, a
    if isinstance(a, Const) and isinstance(b, Mul) and isinstance(b.left, Const):
        return mul(Const(a.value * b.left.value), b.right)
    return Mul(a, b)


def div(a: Expression, b: Expression) -> Expression:
    if is_const(b, 0):
        raise ZeroDivisionError("quotient with constant zero denominator")
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    if is_const(a, 0):
        return ZERO
    if is_const(b, 1):
        return a
    return Div(a, b)


def power(a: Expression, k: int) -> Expression:
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise ValueError("powers must have a nonnegative integer exponent")
    if k == 0:
        return ONE
    if k == 1:
        return a
    if isinstance(a, Const):
        return Const(a.value ** k)
    return Pow(a, k)


def neg(a: Expression) -> Expression:
    """Negation pushed into the leftmost factor so that ``-a*b/c`` parses back to it."""
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Mul):
        if is_const(a.left, -1):
            return a.right
        return mul(neg(a.left), a.right)
    if isinstance(a, Div):
        return div(neg(a.left), a.right)
    return mul(MINUS_ONE, a)


def sub(a: Expression, b: Expression) -> Expression:
    return add(a, neg(b))


def call(name: str, arg: Expression) -> Expression:
    if name not in PRIMITIVES:
        raise ValueError(f"unknown primitive {name!r}")
    return Call(name, arg)


def total(terms) -> Expression:
    out = ZERO
    for term in terms:
        out = add(out, term)
    return out


# ---------------------------------------------------------------------- primitives
@dataclass(frozen=True)
class Primitive:
    """A univariate analytic function: symbolic derivative plus Taylor generator."""

    name: str
    derivative: Callable[[Expression], Expression]

    def coefficients(self, base, order: int) -> list:
        return taylor_coefficients(self.name, base, order)

    def value(self, base) -> Fraction:
        return exact_value(self.name, base)


def exact_value(name: str, base) -> Fraction:
    """Exact rational value of a primitive, where one exists."""
    base = as_rational(base)
    if name == "sqrt":
        if base < 0:
            raise InadmissibleValueError("nonnegative", f"sqrt of negative value {base}")
        root = rational_sqrt(base)
        if root is None:
            raise InadmissibleValueError("rational-square", f"sqrt of {base} is irrational")
        return root
    return taylor_coefficients(name, base, 0)[0]


PRIMITIVES: dict = {
    "exp": Primitive("exp", lambda u: Call("exp", u)),
    "log": Primitive("log", lambda u: div(ONE, u)),
    "sin": Primitive("sin", lambda u: Call("cos", u)),
    "cos": Primitive("cos", lambda u: neg(Call("sin", u))),
    "sqrt": Primitive("sqrt", lambda u: div(ONE, mul(Const(Fraction(2)), Call("sqrt", u)))),
}


# ---------------------------------------------------------------------- printing
def _var_text(v: Var) -> str:
    if v.kind == "t":
        return "t"
    if v.kind == "pd":
        return f"pd[{v.index[0]}][{v.index[1]}]"
    return f"{v.kind}[{v.index[0]}]"


def _const_text(c: Fraction) -> str:
    if c.denominator == 1 and c >= 0:
        return str(c.numerator)
    return f"({c})"


def _unneg(e: Expression):
    if isinstance(e, Const):
        return Const(-e.value) if e.value < 0 else None
    if isinstance(e, Mul):
        if is_const(e.left, -1):
            return e.right
        if isinstance(e.left, Const) and e.left.value < 0:
            return mul(Const(-e.left.value), e.right)
        inner = _unneg(e.left)
        return mul(inner, e.right) if inner is not None else None
    if isinstance(e, Div):
        inner = _unneg(e.left)
        return div(inner, e.right) if inner is not None else None
    return None


def _paren(text: str) -> str:
    return f"({text})"


def to_text(e: Expression) -> str:
    """Canonical printer; ``parse(to_text(e)) == e`` for builder-made trees."""
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return _var_text(e)
    if isinstance(e, Call):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if not isinstance(e.base, (Var, Call)):
            base = _paren(base)
        return f"{base}^{e.exponent}"
    if isinstance(e, Add):
        left = to_text(e.left)
        positive = _unneg(e.right)
        if positive is not None and neg(positive) == e.right:
            right = to_text(positive)
            if isinstance(positive, Add) or right.startswith("-"):
                right = _paren(right)
            return f"{left} - {right}"
        right = to_text(e.right)
        if isinstance(e.right, Add) or right.startswith("-"):
            right = _paren(right)
        return f"{left} + {right}"
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        if isinstance(e, Mul) and is_const(e.left, -1):
            inner = to_text(e.right)
            if isinstance(e.right, (Mul, Div)):
                # "-(a*b)" would parse with the sign pushed into a
                return f"(-1)*({inner})"
            if isinstance(e.right, Add) or inner.startswith("-"):
                inner = _paren(inner)
            return f"-{inner}"
        left = to_text(e.left)
        if isinstance(e.left, Add):
            left = _paren(left)
        right = to_text(e.right)
        if isinstance(e.right, (Add, Mul, Div)) or right.startswith("-"):
            right = _paren(right)
        return f"{left}{op}{right}"
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------- parsing
_TOKEN = re.compile(r"\s*(?:(\d+)|(pd|p|x|t|exp|log|sin|cos|sqrt)|(\[)|(\])|([-+*/^()]))")


class _Parser:
    def __init__(self, text: str, dims=None, allow_t: bool = False):
        self.text = text
        self.pos = 0
        self.dims = dims
        self.allow_t = allow_t
        self.tokens = self._tokenize()
        self.i = 0

    def _tokenize(self):
        toks = []
        pos = 0
        text = self.text
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
            start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
            if m.group(1) is not None:
                end = m.end()
                if end < len(text) and text[end] == ".":
                    raise ParseError("floating-point literals are not allowed", end, text)
                toks.append(("int", int(m.group(1)), start))
            elif m.group(2) is not None:
                word = m.group(2)
                end = m.end()
                if end < len(text) and (text[end].isalnum() or text[end] == "_"):
                    raise ParseError(f"unknown identifier starting {text[start:end + 1]!r}", start, text)
                toks.append(("name", word, start))
            else:
                sym = next(g for g in m.groups()[2:] if g is not None)
                toks.append(("sym", sym, start))
            pos = m.end()
        toks.append(("end", None, len(text)))
        return toks

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, sym):
        tok = self.take()
        if tok[0] != "sym" or tok[1] != sym:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {sym!r}, found {found}", tok[2], self.text)
        return tok

    def parse(self) -> Expression:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2], self.text)
        return e

    def expr(self):
        e = self.term()
        while True:
            tok = self.peek()
            if tok[0] == "sym" and tok[1] in "+-":
                self.take()
                rhs = self.term()
                e = add(e, rhs) if tok[1] == "+" else add(e, neg(rhs))
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            tok = self.peek()
            if tok[0] == "sym" and tok[1] in "*/":
                self.take()
                rhs = self.factor()
                if tok[1] == "*":
                    e = mul(e, rhs)
                else:
                    if is_const(rhs, 0):
                        raise ParseError("division by the constant zero", tok[2], self.text)
                    e = div(e, rhs)
            else:
                return e

    def factor(self):
        tok = self.peek()
        if tok[0] == "sym" and tok[1] == "-":
            self.take()
            return neg(self.factor())
        base = self.base()
        tok = self.peek()
        if tok[0] == "sym" and tok[1] == "^":
            self.take()
            exp_tok = self.take()
            if exp_tok[0] != "int":
                raise ParseError("exponent must be a nonnegative integer", exp_tok[2], self.text)
            return power(base, exp_tok[1])
        return base

    def _index(self):
        self.expect("[")
        tok = self.take()
        if tok[0] != "int":
            raise ParseError("expected an integer index", tok[2], self.text)
        self.expect("]")
        return tok[1]

    def base(self):
        tok = self.take()
        kind, value, pos = tok
        if kind == "int":
            return Const(Fraction(value))
        if kind == "sym" and value == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if value in PRIMITIVES:
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return Call(value, e)
            if value == "t":
                if not self.allow_t:
                    raise ParseError("the symbol t is only allowed in Monge-Ampere right-hand sides",
                                     pos, self.text)
                return T
            if value == "pd":
                v = Var("pd", (self._index(), self._index()))
            else:
                v = Var(value, (self._index(),))
            check_var(v, self.dims)
            return v
        if kind == "end":
            raise ParseError("unexpected end of input", pos, self.text)
        raise ParseError(f"unexpected {value!r}", pos, self.text)


def parse(text: str, dims=None, allow_t: bool = False) -> Expression:
    """Parse ``text``; ``dims`` is anything with ``n``, ``k``, ``m`` attributes (or None)."""
    if not isinstance(text, str):
        raise ParseError("expression text must be a string")
    return _Parser(text, dims, allow_t).parse()


def _dim(dims, name):
    if dims is None:
        return None
    if isinstance(dims, Mapping):
        return dims.get(name)
    return getattr(dims, name, None)


def check_var(v: Var, dims) -> None:
    n, k, m = _dim(dims, "n"), _dim(dims, "k"), _dim(dims, "m")
    ref = _var_text(v)
    if v.kind == "x":
        if v.index[0] < 1 or (n is not None and v.index[0] > n):
            raise IndexRangeError(ref, f"{ref}: index i must satisfy 1 <= i <= {n}")
    elif v.kind == "p":
        if v.index[0] < 1 or (m is not None and v.index[0] > m):
            raise IndexRangeError(ref, f"{ref}: index A must satisfy 1 <= A <= {m}")
    elif v.kind == "pd":
        a, lam = v.index
        if a < 1 or (m is not None and a > m):
            raise IndexRangeError(ref, f"{ref}: index A must satisfy 1 <= A <= {m}")
        if lam < 1 or (k is not None and lam > k):
            raise IndexRangeError(ref, f"{ref}: index L={lam} must satisfy 1 <= L <= {k}")


def check_bounds(e: Expression, dims, allow_t: bool = False) -> None:
    for v in variables(e):
        if v.kind == "t":
            if not allow_t:
                raise IndexRangeError("t", "the symbol t is not allowed here")
            continue
        check_var(v, dims)


# ---------------------------------------------------------------------- traversal
def _walk(e: Expression, seen=None):
    stack = [e]
    seen = set() if seen is None else seen
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        if isinstance(node, (Add, Mul, Div)):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, Pow):
            stack.append(node.base)
        elif isinstance(node, Call):
            stack.append(node.arg)


def variables(e: Expression) -> set:
    return {node for node in _walk(e) if isinstance(node, Var)}


def is_rational(e: Expression) -> bool:
    """True when no analytic primitive occurs."""
    return not any(isinstance(node, Call) for node in _walk(e))


def size(e: Expression) -> int:
    return sum(1 for _ in _walk(e))


def substitute(e: Expression, mapping: Mapping) -> Expression:
    memo = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            out = mapping.get(node, node)
        elif isinstance(node, Const):
            out = node
        elif isinstance(node, Add):
            out = add(go(node.left), go(node.right))
        elif isinstance(node, Mul):
            out = mul(go(node.left), go(node.right))
        elif isinstance(node, Div):
            out = div(go(node.left), go(node.right))
        elif isinstance(node, Pow):
            out = power(go(node.base), node.exponent)
        elif isinstance(node, Call):
            out = Call(node.name, go(node.arg))
        else:
            raise TypeError(f"not an expression: {node!r}")
        memo[key] = out
        return out

    return go(e)


def differentiate(e: Expression, v: Var) -> Expression:
    """Exact partial derivative with local constant folding only."""
    memo = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Const):
            out = ZERO
        elif isinstance(node, Var):
            out = ONE if node == v else ZERO
        elif isinstance(node, Add):
            out = add(go(node.left), go(node.right))
        elif isinstance(node, Mul):
            out = add(mul(go(node.left), node.right), mul(node.left, go(node.right)))
        elif isinstance(node, Div):
            da, db = go(node.left), go(node.right)
            if is_const(db, 0):
                out = div(da, node.right)
            elif is_const(da, 0):
                out = neg(div(mul(node.left, db), power(node.right, 2)))
            else:
                out = div(sub(mul(da, node.right), mul(node.left, db)), power(node.right, 2))
        elif isinstance(node, Pow):
            db = go(node.base)
            k = node.exponent
            out = mul(mul(Const(Fraction(k)), power(node.base, k - 1)), db)
        elif isinstance(node, Call):
            da = go(node.arg)
            out = ZERO if is_const(da, 0) else mul(PRIMITIVES[node.name].derivative(node.arg), da)
        else:
            raise TypeError(f"not an expression: {node!r}")
        memo[key] = out
        return out

    return go(e)


# ---------------------------------------------------------------------- evaluation
def evaluate(e: Expression, env: Mapping, arity: int | None = None, order: int | None = None,
             cache: dict | None = None) -> TruncatedSeries:
    """Compose ``e`` with the series bound in ``env``.

    Rational values in ``env`` are promoted to constant series.  ``arity`` and
    ``order`` default to those of the series in ``env``; the common order is
    the smallest one present.  ``cache`` lets callers share results for
    subtrees across several evaluations in the same environment.
    """
    series_vals = [s for s in env.values() if isinstance(s, TruncatedSeries)]
    if arity is None:
        arity = series_vals[0].arity if series_vals else 0
    if order is None:
        order = min((s.order for s in series_vals), default=0)
    memo = {} if cache is None else cache

    def go(node):
        key = id(node)
        hit = memo.get(key)
        if hit is not None and hit[0] is node:
            return hit[1]
        if isinstance(node, Const):
            out = TruncatedSeries.constant(node.value, arity, order)
        elif isinstance(node, Var):
            if node not in env:
                raise UnboundVariableError(_var_text(node))
            val = env[node]
            if isinstance(val, TruncatedSeries):
                out = val if val.order <= order else val.truncate(order)
            else:
                out = TruncatedSeries.constant(val, arity, order)
        elif isinstance(node, Add):
            out = go(node.left) + go(node.right)
        elif isinstance(node, Mul):
            out = go(node.left) * go(node.right)
        elif isinstance(node, Div):
            den = go(node.right)
            if den.constant_term == 0:
                raise InadmissibleValueError(
                    "nonzero", f"denominator {to_text(node.right)} has zero constant term")
            out = go(node.left) * den.reciprocal()
        elif isinstance(node, Pow):
            out = go(node.base) ** node.exponent
        elif isinstance(node, Call):
            out = go(node.arg).apply(node.name)
        else:
            raise TypeError(f"not an expression: {node!r}")
        memo[key] = (node, out)
        return out

    return go(e)


def evaluate_point(e: Expression, env: Mapping, cache: dict | None = None) -> Fraction:
    """Exact value at a rational point."""
    memo = {} if cache is None else cache

    def go(node):
        key = id(node)
        hit = memo.get(key)
        if hit is not None and hit[0] is node:
            return hit[1]
        if isinstance(node, Const):
            out = node.value
        elif isinstance(node, Var):
            if node not in env:
                raise UnboundVariableError(_var_text(node))
            out = as_rational(env[node])
        elif isinstance(node, Add):
            out = go(node.left) + go(node.right)
        elif isinstance(node, Mul):
            left = go(node.left)
            out = left * go(node.right) if left else Fraction(0)
        elif isinstance(node, Div):
            den = go(node.right)
            if den == 0:
                raise InadmissibleValueError(
                    "nonzero", f"denominator {to_text(node.right)} vanishes")
            out = go(node.left) / den
        elif isinstance(node, Pow):
            out = go(node.base) ** node.exponent
        elif isinstance(node, Call):
            out = exact_value(node.name, go(node.arg))
        else:
            raise TypeError(f"not an expression: {node!r}")
        memo[key] = (node, out)
        return out

    return go(e)
