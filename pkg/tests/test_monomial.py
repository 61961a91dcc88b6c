import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergdecomp import IntMatrix, build_group, character_value, eval_F, eval_Phi, fiber, jacobian_det, rational_inverse
from bergdecomp.errors import DomainError
from bergdecomp.intlin import vec_mat
from bergdecomp.monomial import action_apply, eval_F_real, from_polar, is_off_axes, polar

from conftest import off_axes_points, random_nonsingular


def test_eval_F_examples():
    assert eval_F((0, 0), (0.3 + 0.1j, -2)) == 1
    assert eval_F((1, 1), (2, 3)) == 6
    assert abs(eval_F((-2, 1), (2j, 3)) - 3 / (2j) ** 2) < 1e-15


def test_eval_F_negative_power_on_axis():
    with pytest.raises(DomainError):
        eval_F((-1,), (0.0,))


def test_eval_F_pullback(rng):
    for _ in range(30):
        n = int(rng.integers(1, 4))
        A = random_nonsingular(rng, n, -3, 3)
        a = rng.integers(-3, 4, size=n).tolist()
        z = off_axes_points(rng, n, 5, 0.5, 1.5)
        lhs = eval_F(vec_mat(a, A.rows), z)
        rhs = eval_F(a, eval_Phi(A, z))
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)


def test_phi_examples(rng):
    z = off_axes_points(rng, 2, 10)
    assert np.allclose(eval_Phi(IntMatrix.identity(2), z), z, rtol=0, atol=0)
    p, q = 3, 2
    assert np.allclose(eval_Phi(IntMatrix.diag(p, q), z), np.stack([z[:, 0] ** p, z[:, 1] ** q], axis=-1), rtol=1e-14)
    h = eval_Phi(IntMatrix([[1, -1], [0, 1]]), z)
    assert np.allclose(h, np.stack([z[:, 0] / z[:, 1], z[:, 1]], axis=-1), rtol=1e-14)


def test_phi_composition(rng):
    for _ in range(20):
        A = random_nonsingular(rng, 2, -3, 3)
        B = random_nonsingular(rng, 2, -3, 3)
        AB = IntMatrix([[sum(A.rows[i][k] * B.rows[k][j] for k in range(2)) for j in range(2)] for i in range(2)])
        z = off_axes_points(rng, 2, 5, 0.7, 1.3)
        assert np.allclose(eval_Phi(AB, z), eval_Phi(A, eval_Phi(B, z)), rtol=1e-11, atol=0)


def test_jacobian_examples(rng):
    z = off_axes_points(rng, 2, 10)
    assert np.allclose(jacobian_det(IntMatrix.identity(2), z), 1)
    assert np.allclose(jacobian_det(IntMatrix.diag(2, 2), z), 4 * z[:, 0] * z[:, 1], rtol=1e-14)


def finite_difference_jacobian(A, z, h=1e-5):
    n = A.n
    J = np.zeros((n, n), dtype=complex)
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = h
        J[:, k] = (eval_Phi(A, z + e) - eval_Phi(A, z - e)) / (2 * h)
    return np.linalg.det(J)


def test_jacobian_finite_difference(rng):
    for _ in range(20):
        n = int(rng.integers(1, 4))
        A = random_nonsingular(rng, n, -3, 3)
        z = off_axes_points(rng, n, 1, 0.6, 1.4)[0]
        fd = finite_difference_jacobian(A, z)
        exact = jacobian_det(A, z)
        assert abs(fd - exact) <= 1e-6 * abs(exact)


def test_polar_examples():
    r, t = polar((1, 1))
    assert np.allclose(r, 1) and np.allclose(t, 0)
    r, t = polar((-2,))
    assert np.allclose(r, 2) and np.allclose(t, 0.5)
    with pytest.raises(DomainError):
        polar((0, 1))


def test_polar_round_trip(rng):
    z = off_axes_points(rng, 3, 50)
    r, t = polar(z)
    assert np.all((t >= 0) & (t < 1))
    assert np.allclose(from_polar(r, t), z, rtol=1e-14, atol=0)


def test_is_off_axes():
    assert is_off_axes((1, 2j))
    assert not is_off_axes((0, 2j))


def test_fiber_trivial_and_square_root():
    G = build_group(IntMatrix.identity(2))
    w = np.array([0.3 + 0.2j, -0.5])
    assert np.allclose(fiber(G.A, G, w), w[None, :])
    A = IntMatrix([[2]])
    G = build_group(A)
    pts = fiber(A, G, (1.0,))
    assert sorted(np.round(pts[:, 0].real, 12)) == [-1.0, 1.0]


def grid_search_fiber(p, q, w, N=720, tol=1e-9):
    """Exhaustive scan of the torus on an angle grid that contains every p-th and q-th root."""
    angles = np.exp(2j * np.pi * np.arange(N) / N)
    hits = []
    for a in angles:
        for b in angles:
            if abs(a**p - w[0]) < tol and abs(b**q - w[1]) < tol:
                hits.append((a, b))
    return np.array(hits)


def test_fiber_against_grid_search():
    p, q = 2, 3
    A = IntMatrix.diag(p, q)
    G = build_group(A)
    ours = fiber(A, G, (1.0, 1.0))
    oracle = grid_search_fiber(p, q, (1.0, 1.0))
    assert len(ours) == len(oracle) == 6
    for pt in oracle:
        assert np.min(np.linalg.norm(ours - pt, axis=1)) < 1e-12


def test_fiber_cardinality_random(rng):
    for _ in range(40):
        n = int(rng.integers(1, 4))
        A = random_nonsingular(rng, n, -4, 4, max_det=60)
        G = build_group(A)
        w = off_axes_points(rng, n, 1, 0.3, 1.0)[0]
        pts = fiber(A, G, w)
        assert pts.shape == (abs(A.det()), n)
        assert np.max(np.abs(eval_Phi(A, pts) - w)) < 1e-10
        # pairwise distinct
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        assert np.all(d[~np.eye(len(pts), dtype=bool)] > 1e-9)


def test_fiber_batch_shape(rng):
    A = IntMatrix([[2, 0], [1, 2]])
    G = build_group(A)
    w = off_axes_points(rng, 2, 7, 0.3, 0.9)
    assert fiber(A, G, w).shape == (7, 4, 2)


def test_action(rng):
    A = IntMatrix([[2, -3], [0, 3]])
    G = build_group(A)
    z = off_axes_points(rng, 2, 10)
    assert np.allclose(action_apply(G, (0, 0), z), z)
    for m1 in G.reps_GA:
        assert np.allclose(eval_Phi(A, action_apply(G, m1, z)), eval_Phi(A, z), rtol=1e-12)
        for m2 in G.reps_GA:
            msum = tuple(a + b for a, b in zip(m1.m, m2.m))
            lhs = action_apply(G, msum, z)
            rhs = action_apply(G, m1, action_apply(G, m2, z))
            assert np.allclose(lhs, rhs, rtol=1e-14, atol=0)


def test_action_rejects_axis_points():
    G = build_group(IntMatrix.diag(2, 2))
    with pytest.raises(DomainError):
        action_apply(G, (1, 0), (0.0, 0.5))


def test_monomial_of_deck_phase_is_character(rng):
    for _ in range(10):
        A = random_nonsingular(rng, 2, -4, 4, max_det=30)
        G = build_group(A)
        one = np.ones(2, dtype=complex)
        for m in G.reps_GA:
            xi = action_apply(G, m, one)
            for b in G.reps_GAt:
                assert abs(eval_F(b.m, xi) - complex(character_value(G, b, m))) < 1e-14 * max(1, sum(map(abs, b.m)))


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.lists(st.floats(0.2, 3), min_size=3, max_size=3),
)
def test_real_monomials_multiply(a, b, t):
    lhs = eval_F_real(a, t) * eval_F_real(b, t)
    rhs = eval_F_real([x + y for x, y in zip(a, b)], t)
    assert np.isclose(lhs, rhs, rtol=1e-12)


def test_inverse_monomial_map_on_positive_reals(rng):
    for _ in range(20):
        A = random_nonsingular(rng, 3, -3, 3)
        Ainv = [[float(x) for x in row] for row in rational_inverse(A).rows]
        t = rng.uniform(0.5, 1.5, size=3)
        s = np.array([eval_F_real(A.row(j), t) for j in range(3)])
        back = np.array([eval_F_real(Ainv[j], s) for j in range(3)])
        assert np.allclose(back, t, rtol=1e-12)
