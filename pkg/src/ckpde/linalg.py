"""Exact linear algebra over the rationals (row reduction, rank, nullspace, solve)."""
from __future__ import annotations

from fractions import Fraction

from .errors import SingularSystemError


def _copy(rows):
    return [[Fraction(v) for v in row] for row in rows]


def rref(rows, ncols: int | None = None):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    a = _copy(rows)
    if not a:
        return a, []
    ncols = len(a[0]) if ncols is None else ncols
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def rank(rows) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def nullspace(rows, ncols: int | None = None) -> list:
    """Basis of {v : rows . v = 0}, one vector per free column (unit in that column)."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if not rows:
        return [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve(matrix, rhs) -> list:
    """Unique solution of a square or overdetermined consistent system."""
    n = len(matrix[0]) if matrix else 0
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    red, pivots = rref(aug, n + 1)
    if n in pivots:
        raise SingularSystemError("linear system is inconsistent")
    if len(pivots) < n:
        raise SingularSystemError(f"linear system is underdetermined (rank {len(pivots)} < {n})")
    sol = [Fraction(0)] * n
    for row, pc in zip(red, pivots):
        sol[pc] = row[n]
    return sol


def det(matrix) -> Fraction:
    a = _copy(matrix)
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("determinant needs a square matrix")
    out = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if a[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            out = -out
        out *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [vi - f * vc for vi, vc in zip(a[i], a[c])]
    return out


def in_span(vectors, v) -> bool:
    if not vectors:
        return all(x == 0 for x in v)
    return rank(list(vectors) + [list(v)]) == rank(vectors)


def matmul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0)) for j in range(len(b[0]))]
            for i in range(len(a))]
