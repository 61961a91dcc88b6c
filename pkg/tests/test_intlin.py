import itertools
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from bergdecomp import IntMatrix, RatMatrix, in_row_span, rational_inverse, smith_normal_form
from bergdecomp.errors import DimensionError, SingularMatrixError


def determinantal_divisor_factors(rows):
    """Invariant factors from gcds of k×k minors; independent of any elimination."""
    n = len(rows)
    M = sympy.Matrix(rows)
    divisors = [1]
    for k in range(1, n + 1):
        g = 0
        for r in itertools.combinations(range(n), k):
            for c in itertools.combinations(range(n), k):
                g = math.gcd(g, int(M.extract(list(r), list(c)).det()))
        divisors.append(g)
    return tuple(divisors[k] // divisors[k - 1] for k in range(1, n + 1))


@st.composite
def nonsingular(draw, max_n=3, bound=6):
    n = draw(st.integers(1, max_n))
    rows = draw(st.lists(st.lists(st.integers(-bound, bound), min_size=n, max_size=n), min_size=n, max_size=n))
    assume(sympy.Matrix(rows).det() != 0)
    return IntMatrix(rows)


def matmul(X, Y):
    return [[sum(X[i][k] * Y[k][j] for k in range(len(Y))) for j in range(len(Y[0]))] for i in range(len(X))]


def test_identity_snf():
    snf = smith_normal_form(IntMatrix.identity(2))
    assert snf.lam == (1, 1)
    assert snf.S == IntMatrix.identity(2)
    assert snf.T == IntMatrix.identity(2)


@pytest.mark.parametrize("rows, lam", [
    ([[2, 0], [0, 3]], (1, 6)),
    ([[2, 0], [0, 2]], (2, 2)),
    ([[2, -3], [0, 3]], (1, 6)),
    ([[2, 0], [1, 2]], (1, 4)),
])
def test_snf_known_cases(rows, lam):
    assert smith_normal_form(IntMatrix(rows)).invariant_factors == lam
    assert determinantal_divisor_factors(rows) == lam


def test_snf_against_sympy_on_fixed_matrix():
    rows = [[4, -2, 6], [2, 8, -4], [0, 6, 10]]
    ours = smith_normal_form(IntMatrix(rows)).lam
    theirs = sympy_snf(sympy.Matrix(rows), domain=sympy.ZZ)
    assert ours == tuple(abs(int(theirs[i, i])) for i in range(3))


@settings(max_examples=150, deadline=None)
@given(nonsingular())
def test_snf_properties(A):
    snf = smith_normal_form(A)
    S, T, lam = snf.S, snf.T, snf.lam
    assert abs(S.det()) == 1 and abs(T.det()) == 1
    D = matmul(matmul(S.tolist(), A.tolist()), T.tolist())
    assert D == [[lam[i] if i == j else 0 for j in range(A.n)] for i in range(A.n)]
    assert all(l > 0 for l in lam)
    assert all(lam[i + 1] % lam[i] == 0 for i in range(A.n - 1))
    assert math.prod(lam) == abs(A.det())
    assert lam == determinantal_divisor_factors(A.tolist())


def test_snf_singular_raises():
    with pytest.raises(SingularMatrixError):
        IntMatrix([[1, 2], [2, 4]])


@pytest.mark.parametrize("rows, expected", [
    ([[1, 0], [0, 1]], [[1, 0], [0, 1]]),
    ([[2, 0], [0, 3]], [[Fraction(1, 2), 0], [0, Fraction(1, 3)]]),
    ([[2, -3], [0, 3]], [[Fraction(1, 2), Fraction(1, 2)], [0, Fraction(1, 3)]]),
])
def test_rational_inverse_examples(rows, expected):
    assert rational_inverse(IntMatrix(rows)) == RatMatrix(expected)


@settings(max_examples=100, deadline=None)
@given(nonsingular())
def test_rational_inverse_matches_sympy(A):
    inv = rational_inverse(A)
    ref = sympy.Matrix(A.tolist()).inv()
    assert [[Fraction(int(x.p), int(x.q)) for x in ref.row(i)] for i in range(A.n)] == [list(r) for r in inv.rows]


def brute_in_row_span(rows, v, box=5):
    """Search ``m·Aᵗ = v`` over a box of integer vectors."""
    n = len(rows)
    for m in itertools.product(range(-box, box + 1), repeat=n):
        if all(sum(m[i] * rows[j][i] for i in range(n)) == v[j] for j in range(n)):
            return True
    return False


@pytest.mark.parametrize("rows, v, expected", [
    ([[2, 0], [0, 3]], (2, 0), True),
    ([[2, 0], [0, 3]], (1, 0), False),
    ([[2, -3], [0, 3]], (2, -3), False),
    ([[2, -3], [0, 3]], (-1, 3), True),
])
def test_in_row_span_examples(rows, v, expected):
    assert in_row_span(IntMatrix(rows), v) is expected
    assert brute_in_row_span(rows, v) is expected


def test_in_row_span_of_transpose():
    # (2,-3) is the first row of A, hence a member of the lattice spanned by the columns of Aᵗ
    assert in_row_span(IntMatrix([[2, -3], [0, 3]]).T, (2, -3))


@settings(max_examples=60, deadline=None)
@given(nonsingular(max_n=2, bound=3), st.lists(st.integers(-6, 6), min_size=2, max_size=2))
def test_in_row_span_against_brute_force(A, v):
    v = v[: A.n]
    # |det| ≤ 18 and |v| ≤ 6 keep every solution m inside the search box
    assert in_row_span(A, v) == brute_in_row_span(A.tolist(), v, box=40)


def test_in_row_span_dimension_mismatch():
    with pytest.raises(DimensionError):
        in_row_span(IntMatrix.identity(2), (1, 2, 3))
