"""Small dense exact linear algebra over ``int`` and ``Fraction``.

Matrices are lists of rows.  Everything here is exact; sizes in this
package are tiny so no attempt is made at asymptotic cleverness.
"""
from __future__ import annotations

from fractions import Fraction


class SingularMatrix(ArithmeticError):
    pass


def identity(n, one=1):
    return [[one if i == j else 0 * one for j in range(n)] for i in range(n)]


def matmul(a, b):
    if not a:
        return []
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def matvec(a, v):
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def matpow(a, k):
    """``a**k`` by repeated squaring."""
    if k < 0:
        raise ValueError("negative exponent")
    result = identity(len(a))
    base = [row[:] for row in a]
    while k:
        if k & 1:
            result = matmul(result, base)
        k >>= 1
        if k:
            base = matmul(base, base)
    return result


def det_int(a) -> int:
    """Determinant of an integer matrix (Bareiss fraction-free elimination)."""
    n = len(a)
    if n == 0:
        return 1
    m = [list(map(int, row)) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def solve(a, b):
    """Solve ``a x = b`` exactly; ``b`` is a vector or a list of columns' rows."""
    n = len(a)
    vector = b and not isinstance(b[0], (list, tuple))
    rhs = [[Fraction(v)] for v in b] if vector else [[Fraction(v) for v in row] for row in b]
    m = [[Fraction(v) for v in a[i]] + rhs[i] for i in range(n)]
    width = len(m[0]) if n else 0
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrix("matrix is singular")
        m[col], m[pivot] = m[pivot], m[col]
        p = m[col][col]
        if p != 1:
            m[col] = [v / p for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    sol = [row[n:width] for row in m]
    return [row[0] for row in sol] if vector else sol


def inverse(a):
    return solve(a, identity(len(a), Fraction(1)))
