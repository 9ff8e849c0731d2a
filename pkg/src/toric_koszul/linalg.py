"""Exact linear algebra over the rationals.

Matrices are lists of rows; entries are ints or Fractions.  Everything here is
small (a few dozen rows at most), so plain Python beats any library overhead.
"""
from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[Fraction]]
Vector = List[Fraction]


def zeros(rows: int, cols: int) -> Matrix:
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def to_fraction_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def transpose(m: Sequence[Sequence], ncols: Optional[int] = None) -> Matrix:
    """Transpose; ``ncols`` is needed when ``m`` has no rows."""
    if not m:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*m)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence], inner: Optional[int] = None,
           cols: Optional[int] = None) -> Matrix:
    """Product a @ b.  ``inner``/``cols`` disambiguate shapes of empty operands."""
    n_rows = len(a)
    n_inner = len(b) if b else (len(a[0]) if a else (inner or 0))
    n_cols = len(b[0]) if b else (cols or 0)
    out = zeros(n_rows, n_cols)
    for i in range(n_rows):
        ai = a[i]
        oi = out[i]
        for k in range(n_inner):
            aik = ai[k]
            if aik:
                bk = b[k]
                for j in range(n_cols):
                    if bk[j]:
                        oi[j] += aik * bk[j]
    return out


def is_zero(m: Sequence[Sequence]) -> bool:
    return all(not x for row in m for x in row)


def _integer_rows(m: Sequence[Sequence]) -> List[List[int]]:
    rows = []
    for row in m:
        den = 1
        for x in row:
            if isinstance(x, Fraction) and x.denominator != 1:
                den = lcm(den, x.denominator)
        rows.append([int(x * den) for x in row])
    return rows


def rank(m: Sequence[Sequence]) -> int:
    """Rank by fraction-free (Bareiss-style) elimination on an integer copy."""
    a = _integer_rows(m)
    if not a:
        return 0
    n_rows, n_cols = len(a), len(a[0])
    r = 0
    prev = 1
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        for i in range(r + 1, n_rows):
            f = a[i][c]
            row_i, row_r = a[i], a[r]
            for j in range(c, n_cols):
                row_i[j] = (p * row_i[j] - f * row_r[j]) // prev
        prev = p
        r += 1
        if r == n_rows:
            break
    return r


def rref(m: Sequence[Sequence], ncols: Optional[int] = None) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    a = [[Fraction(x) for x in row] for row in m]
    n_cols = len(a[0]) if a else (ncols or 0)
    pivots: List[int] = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [x * inv for x in a[r]]
        row_r = a[r]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], row_r)]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def nullspace(m: Sequence[Sequence], ncols: int) -> Matrix:
    """Basis (as rows) of {x : m x = 0}."""
    red, pivots = rref(m, ncols)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve(m: Sequence[Sequence], b: Sequence, ncols: int) -> Optional[Vector]:
    """One solution x of m x = b, or None when inconsistent."""
    aug = [list(row) + [bi] for row, bi in zip(m, b)]
    red, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(red, pivots):
        x[p] = row[ncols]
    return x


def in_span(vectors: Sequence[Sequence], v: Sequence, dim: int) -> bool:
    if not any(v):
        return True
    return rank(list(vectors) + [list(v)]) == rank(vectors) if vectors else False


class Reducer:
    """Quotient of Q^n by the span of some relation vectors.

    ``coords`` maps a vector of Q^n to coordinates in the quotient basis formed
    by the non-pivot standard vectors; ``lift(i)`` is the standard vector used
    as the i-th basis element.
    """

    __slots__ = ("n", "rows", "pivots", "free")

    def __init__(self, relations: Sequence[Sequence], n: int):
        self.n = n
        self.rows, self.pivots = rref(relations, n) if relations else ([], [])
        piv = set(self.pivots)
        self.free = [c for c in range(n) if c not in piv]

    @property
    def dim(self) -> int:
        return len(self.free)

    def coords(self, v: Sequence) -> Vector:
        if not self.rows:
            return [Fraction(v[c]) for c in self.free]
        w = [Fraction(x) for x in v]
        for row, p in zip(self.rows, self.pivots):
            f = w[p]
            if f:
                for j in self.free:
                    if row[j]:
                        w[j] -= f * row[j]
        return [w[c] for c in self.free]
