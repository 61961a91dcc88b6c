"""Exact integer and rational linear algebra.

Everything here works on Python ints and :class:`fractions.Fraction`; no
floating point is involved, so determinants, inverses and the Smith normal
form are exact for any entry size.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DimensionError, SingularMatrixError

__all__ = [
    "IntMatrix",
    "RatMatrix",
    "SmithDecomposition",
    "smith_normal_form",
    "rational_inverse",
    "in_row_span",
    "vec_mat",
    "identity_rows",
]


def identity_rows(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _det_bareiss(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free Gaussian elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def vec_mat(v: Sequence, rows: Sequence[Sequence]) -> tuple:
    """Row vector times matrix, ``v·M``."""
    if len(v) != len(rows):
        raise DimensionError(f"vector of length {len(v)} against {len(rows)} rows")
    ncols = len(rows[0]) if rows else 0
    return tuple(sum(v[i] * rows[i][j] for i in range(len(v))) for j in range(ncols))


def _matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    if len(a[0]) != len(b):
        raise DimensionError("inner dimensions differ")
    return [[sum(r[k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for r in a]


class _SquareMatrix:
    __slots__ = ("_rows",)

    def __init__(self, rows):
        self._rows = rows

    @property
    def n(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> tuple:
        return self._rows

    def __getitem__(self, idx):
        i, j = idx
        return self._rows[i][j]

    def row(self, i: int) -> tuple:
        return self._rows[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._rows)

    def tolist(self) -> list[list]:
        return [list(r) for r in self._rows]

    def __eq__(self, other):
        if not isinstance(other, _SquareMatrix):
            return NotImplemented
        return self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __iter__(self):
        return iter(self._rows)

    def __len__(self):
        return len(self._rows)

    def left_mul(self, v: Sequence) -> tuple:
        """``v·M`` for a row vector ``v``."""
        return vec_mat(v, self._rows)

    def apply(self, v: Sequence) -> tuple:
        """``M·v`` for a column vector ``v``."""
        if len(v) != self.n:
            raise DimensionError(f"vector of length {len(v)} for a {self.n}x{self.n} matrix")
        return tuple(sum(a * b for a, b in zip(r, v)) for r in self._rows)


class IntMatrix(_SquareMatrix):
    """Non-singular square matrix with integer entries."""

    __slots__ = ()

    def __init__(self, rows: Iterable[Iterable[int]]):
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise DimensionError("IntMatrix needs a non-empty square array")
        for r in rows:
            for x in r:
                if isinstance(x, bool):
                    raise TypeError("boolean entries are not integers")
        super().__init__(rows)
        if _det_bareiss(rows) == 0:
            raise SingularMatrixError(f"matrix {self.tolist()} is singular")

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(identity_rows(n))

    @classmethod
    def diag(cls, *entries: int) -> "IntMatrix":
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    def det(self) -> int:
        return _det_bareiss(self._rows)

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(zip(*self._rows))

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            return IntMatrix(_matmul(self._rows, other._rows))
        if isinstance(other, RatMatrix):
            return RatMatrix(_matmul(self._rows, other.rows))
        return NotImplemented

    def __repr__(self):
        return f"IntMatrix({self.tolist()})"


class RatMatrix(_SquareMatrix):
    """Square matrix with exact rational entries."""

    __slots__ = ()

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(Fraction(x) for x in r) for r in rows)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise DimensionError("RatMatrix needs a non-empty square array")
        super().__init__(rows)

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix(zip(*self._rows))

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for r in self._rows for x in r)

    def to_int(self) -> IntMatrix:
        if not self.is_integral():
            raise ValueError("matrix has non-integer entries")
        return IntMatrix([[int(x) for x in r] for r in self._rows])

    def __matmul__(self, other):
        if isinstance(other, _SquareMatrix):
            return RatMatrix(_matmul(self._rows, other.rows))
        return NotImplemented

    def __rmatmul__(self, other):
        if isinstance(other, _SquareMatrix):
            return RatMatrix(_matmul(other.rows, self._rows))
        return NotImplemented

    def __repr__(self):
        return f"RatMatrix({[[str(x) for x in r] for r in self._rows]})"


def rational_inverse(A: IntMatrix | RatMatrix) -> RatMatrix:
    """Exact inverse by Gauss-Jordan elimination over the rationals."""
    n = A.n
    aug = [[Fraction(x) for x in A.row(i)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r][c] != 0), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        aug[c], aug[piv] = aug[piv], aug[c]
        p = aug[c][c]
        aug[c] = [x / p for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return RatMatrix([row[n:] for row in aug])


@dataclass(frozen=True)
class SmithDecomposition:
    """``S·A·T = diag(lam)`` with S, T unimodular and ``lam`` a divisor chain."""

    S: IntMatrix
    T: IntMatrix
    lam: tuple[int, ...]

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        return self.lam


def _pick_pivot(B, t):
    n = len(B)
    best = None
    for i in range(t, n):
        for j in range(t, n):
            x = abs(B[i][j])
            if x and (best is None or x < best[0]):
                best = (x, i, j)
    return best


def smith_normal_form(A: IntMatrix) -> SmithDecomposition:
    """Smith normal form by gcd-driven row and column elimination.

    The pivot at each stage is the entry of smallest absolute value in the
    remaining block (ties broken by lowest row, then lowest column), which
    makes the unimodular factors reproducible.
    """
    n = A.n
    B = A.tolist()
    S = identity_rows(n)
    T = identity_rows(n)

    def swap_rows(i, j):
        B[i], B[j] = B[j], B[i]
        S[i], S[j] = S[j], S[i]

    def swap_cols(i, j):
        for M in (B, T):
            for r in M:
                r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        for M in (B, S):
            M[dst] = [a + q * b for a, b in zip(M[dst], M[src])]

    def add_col(dst, src, q):
        for M in (B, T):
            for r in M:
                r[dst] += q * r[src]

    for t in range(n):
        while True:
            pivot = _pick_pivot(B, t)
            if pivot is None:
                raise SingularMatrixError("matrix is singular")
            _, pi, pj = pivot
            if pi != t:
                swap_rows(t, pi)
            if pj != t:
                swap_cols(t, pj)
            p = B[t][t]
            clean = True
            for i in range(t + 1, n):
                if B[i][t]:
                    add_row(i, t, -(B[i][t] // p))
                    clean = clean and B[i][t] == 0
            for j in range(t + 1, n):
                if B[t][j]:
                    add_col(j, t, -(B[t][j] // p))
                    clean = clean and B[t][j] == 0
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, n) for j in range(t + 1, n) if B[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if B[t][t] < 0:
            B[t] = [-x for x in B[t]]
            S[t] = [-x for x in S[t]]

    return SmithDecomposition(IntMatrix(S), IntMatrix(T), tuple(B[i][i] for i in range(n)))


def in_row_span(A: IntMatrix, v: Sequence[int]) -> bool:
    """Whether ``v = m·Aᵗ`` for some integer vector ``m``.

    Equivalently, ``v`` lies in the lattice generated by the columns of A.
    """
    if len(v) != A.n:
        raise DimensionError(f"vector of length {len(v)} for a {A.n}x{A.n} matrix")
    m = vec_mat([Fraction(x) for x in v], rational_inverse(A).T.rows)
    return all(x.denominator == 1 for x in m)
