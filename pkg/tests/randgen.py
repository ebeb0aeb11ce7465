"""Seeded random generators shared by the unit and acceptance tests."""

import random
from fractions import Fraction

from ckpde import expr as ex
from ckpde.compat import LinearFieldSystem
from ckpde.series import TruncatedSeries
from ckpde.system import SystemSpec


def rational(rng, lo=-4, hi=4, den=3):
    return Fraction(rng.randint(lo, hi), rng.randint(1, den))


def nonzero_rational(rng, lo=-4, hi=4, den=3):
    while True:
        q = rational(rng, lo, hi, den)
        if q:
            return q


def series(rng, arity, order, terms=6, constant=None):
    """Sparse random series; ``constant`` pins the constant term."""
    exps = []
    for _ in range(terms):
        deg = rng.randint(0, order)
        e = [0] * arity
        for _ in range(deg):
            e[rng.randrange(arity)] += 1
        exps.append(tuple(e))
    coeffs = {}
    for e in exps:
        coeffs[e] = coeffs.get(e, 0) + rational(rng)
    if constant is not None:
        coeffs[(0,) * arity] = Fraction(constant)
    return TruncatedSeries(arity, order, coeffs)


def unit_series(rng, arity, order, terms=6):
    """Series with a nonzero constant term, suitable for reciprocals."""
    return series(rng, arity, order, terms, constant=nonzero_rational(rng))


def square_series(rng, arity, order, terms=5):
    """s = q^2 with q(0) > 0, so sqrt(s) has a rational leading term."""
    q = series(rng, arity, order, terms, constant=Fraction(rng.randint(1, 4), rng.randint(1, 3)))
    return q * q


def all_vars(dims):
    n, k, m = dims["n"], dims["k"], dims["m"]
    out = [ex.x(i) for i in range(1, n + 1)] + [ex.p(a) for a in range(1, m + 1)]
    out += [ex.pd(a, l) for a in range(1, m + 1) for l in range(1, k + 1)]
    return out


def polynomial(rng, variables, degree=2, terms=3):
    """Random polynomial expression of total degree <= ``degree``."""
    acc = ex.ZERO
    for _ in range(terms):
        mono = ex.const(rational(rng))
        for _ in range(rng.randint(0, degree)):
            mono = ex.mul(mono, rng.choice(variables))
        acc = ex.add(acc, mono)
    return acc


def expression(rng, variables, depth=3, primitives=True):
    """Builder-made random AST over ``variables``."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.4:
            return ex.const(rational(rng, -5, 5, 4))
        return rng.choice(variables)
    op = rng.choice(["add", "sub", "mul", "div", "pow", "neg", "call"] if primitives
                    else ["add", "sub", "mul", "div", "pow", "neg"])
    a = expression(rng, variables, depth - 1, primitives)
    if op == "neg":
        return ex.neg(a)
    if op == "pow":
        return ex.power(a, rng.randint(0, 3))
    if op == "call":
        return ex.call(rng.choice(sorted(ex.PRIMITIVES)), a)
    b = expression(rng, variables, depth - 1, primitives)
    if op == "div":
        if ex.is_const(b, 0):
            b = ex.ONE
        return ex.div(a, b)
    return {"add": ex.add, "sub": ex.sub, "mul": ex.mul}[op](a, b)


def random_point(rng, sys):
    x = [rational(rng) for _ in range(sys.n)]
    p = [rational(rng) for _ in range(sys.m)]
    pp = [[rational(rng) for _ in range(sys.k)] for _ in range(sys.m)]
    return x, p, pp


def random_system(rng):
    """Polynomial system with n <= 4, k <= 2, m <= 2, degree <= 2.

    Mixes generic right-hand sides (usually incompatible), single-normal
    systems (always compatible), gradients of x-only potentials and constant
    coefficient commuting transports (both compatible).
    """
    n = rng.randint(2, 4)
    k = rng.randint(1, min(2, n - 1))
    m = rng.randint(1, 2)
    dims = {"n": n, "k": k, "m": m}
    kind = rng.choice(["generic", "generic", "gradient", "transport"])
    xs = [ex.x(i) for i in range(1, n + 1)]
    F = {}
    if kind == "generic":
        for a in range(1, m + 1):
            for al in range(k + 1, n + 1):
                F[a, al] = polynomial(rng, all_vars(dims))
    elif kind == "gradient":
        for a in range(1, m + 1):
            h = polynomial(rng, xs, degree=3, terms=4)
            for al in range(k + 1, n + 1):
                F[a, al] = ex.differentiate(h, ex.x(al))
    else:
        # u^A_alpha = sum_L c_{alpha L} u^A_L with constant c: the fields commute
        c = {(al, l): rational(rng) for al in range(k + 1, n + 1) for l in range(1, k + 1)}
        for a in range(1, m + 1):
            for al in range(k + 1, n + 1):
                F[a, al] = ex.total(ex.mul(ex.const(c[al, l]), ex.pd(a, l)) for l in range(1, k + 1))
    return kind, SystemSpec(n, k, m, F)


def random_linear_fields(rng, m):
    """Linear field systems; half are built to commute, the rest are generic."""
    n = rng.randint(3, 4)
    k = rng.randint(1, n - 2)
    xs = [ex.x(i) for i in range(1, n + 1)]
    xi = {}
    commuting = rng.random() < 0.5
    if commuting:
        # coefficients of L_alpha depend on x^alpha only, times one fixed matrix
        M = [[rational(rng) for _ in range(m)] for _ in range(m)]
        for al in range(k + 1, n + 1):
            for lam in range(1, k + 1):
                scalar = polynomial(rng, [ex.x(al)], degree=2, terms=2)
                for a in range(1, m + 1):
                    for b in range(1, m + 1):
                        xi[a, lam, al, b] = ex.mul(ex.const(M[a - 1][b - 1]), scalar)
    else:
        for al in range(k + 1, n + 1):
            for lam in range(1, k + 1):
                for a in range(1, m + 1):
                    for b in range(1, m + 1):
                        if rng.random() < 0.6:
                            xi[a, lam, al, b] = polynomial(rng, xs, degree=2, terms=2)
    return commuting, LinearFieldSystem(n, k, m, xi)


def rng_for(*key):
    return random.Random(repr(key))
