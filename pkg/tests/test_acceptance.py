"""Acceptance criteria, one marker per criterion; the summary prints a line for each."""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from bergdecomp import (
    Ellipsoid,
    IntMatrix,
    WeightSpec,
    admissible_representative,
    ball,
    build_group,
    build_kernel,
    character_value,
    check_orthogonality,
    disk,
    eval_Phi,
    fiber,
    is_admissible,
    polydisk,
    smith_normal_form,
)
from bergdecomp.domains import annulus, product
from bergdecomp.group import Phase, xi_phases
from bergdecomp.identities import (
    DecompositionScenario,
    bell_fiber_residual,
    corollary_inequality,
    decomposition_residual,
    diagonal_residual,
    monomial_ball_estimate,
)
from bergdecomp.projection import LaurentPolynomial, check_projection_algebra, norm_identity_residual, parseval_residual
from bergdecomp.quadrature import QuadratureSpec
from bergdecomp.scenario import load_scenario, shipped_scenario_path

from conftest import off_axes_points, random_nonsingular
from test_intlin import determinantal_divisor_factors
from test_monomial import grid_search_fiber

F = Fraction
UNIT1 = WeightSpec.unit(1)
UNIT2 = WeightSpec.unit(2)
PROJECTION_MATRICES = [IntMatrix.diag(2, 3), IntMatrix([[2, 0], [1, 2]]), IntMatrix([[2, -3], [0, 3]])]


def disk_squaring():
    return DecompositionScenario(IntMatrix([[2]]), disk(), disk(), UNIT1, use_full_domains=True,
                                 b_choices={(1,): (-1,)}, kernel_tol=1e-13)


def disk_pairs(S):
    z, w = S.sample_points(50, seed=7), S.sample_points(50, seed=8)
    assert np.all(np.abs(z) <= 0.7) and np.all(np.abs(w) <= 0.7)
    return z, w


@pytest.mark.acceptance(1, "disk squaring identity")
def test_criterion_1_disk_identity():
    start = time.perf_counter()
    S = disk_squaring()
    z, w = disk_pairs(S)
    rep = decomposition_residual(S, z, w)
    elapsed = time.perf_counter() - start
    closed = 1 / (math.pi * (1 - z[:, 0] * np.conj(w[:, 0])) ** 2)
    assert np.max(np.abs(closed - rep.rhs) / np.abs(closed)) < 1e-8
    assert rep.max_residual < 1e-8
    assert elapsed < 10


@pytest.mark.acceptance(2, "transformation law over fibers")
def test_criterion_2_bell_identity():
    S = disk_squaring()
    z, w = disk_pairs(S)
    # v = Φ(w): its fiber is ±w, inside the same sampling disk
    v = eval_Phi(S.A, w)
    K = S.kernel1()
    residual = bell_fiber_residual(S.A, S.group, K, K, z, v)
    assert residual.shape == (50,)
    assert np.max(residual) < 1e-8


def group_matrices():
    rng = np.random.default_rng(314159)
    return [random_nonsingular(rng, int(rng.integers(1, 4)), -5, 5, max_det=60) for _ in range(100)]


@pytest.mark.acceptance(3, "exact group suite")
def test_criterion_3_group_suite():
    start = time.perf_counter()
    for A in group_matrices():
        d = abs(A.det())
        snf = smith_normal_form(A)
        assert snf.invariant_factors == determinantal_divisor_factors(A.tolist())
        assert math.prod(snf.invariant_factors) == d
        G = build_group(A)
        assert G.order == len(G.reps_GA) == len(G.reps_GAt) == d
        orth = check_orthogonality(G)
        assert orth.exact and orth.max_deviation < 1e-12
        xis = [xi_phases(G, m) for m in G.reps_GA]
        assert len(set(xis)) == d
        for b in G.reps_GAt:
            for m, xi in zip(G.reps_GA, xis):
                product_ = Phase(0)
                for phase, bk in zip(xi, b.m):
                    product_ = product_ * phase**bk
                assert product_ == character_value(G, b, m)
    assert time.perf_counter() - start < 30


@pytest.mark.acceptance(4, "fiber suite")
def test_criterion_4_fiber_cardinality():
    rng = np.random.default_rng(2718)
    for A in group_matrices():
        G = build_group(A)
        w = off_axes_points(rng, A.n, 3, 0.3, 1.0)
        pts = fiber(A, G, w)
        assert pts.shape == (3, abs(A.det()), A.n)
        assert np.max(np.abs(eval_Phi(A, pts) - w[:, None, :])) < 1e-10


@pytest.mark.acceptance(4, "fiber suite")
def test_criterion_4_grid_oracle():
    A = IntMatrix.diag(2, 3)
    G = build_group(A)
    roots = grid_search_fiber(2, 3, (1.0, 1.0))
    # a generic torus point: its fiber is one preimage times the grid roots of unity
    base = np.array([np.exp(0.35j), np.exp(-0.7j)])
    for w, oracle in [((1.0, 1.0), roots), (base**np.array([2, 3]), roots * base)]:
        ours = fiber(A, G, w)
        assert len(ours) == len(oracle) == 6
        for pt in oracle:
            assert np.min(np.linalg.norm(ours - pt, axis=1)) < 1e-12


@pytest.mark.acceptance(5, "projection algebra")
@pytest.mark.parametrize("A", PROJECTION_MATRICES, ids=str)
def test_criterion_5_projection_algebra(A):
    rng = np.random.default_rng(55)
    G = build_group(A)
    for _ in range(3):
        f = LaurentPolynomial.random(2, rng)
        assert check_projection_algebra(G, f, off_axes_points(rng, 2, 20)).max_deviation < 1e-12


@pytest.mark.acceptance(5, "projection algebra")
def test_criterion_5_parseval():
    rng = np.random.default_rng(56)
    G = build_group(IntMatrix([[2, 0], [1, 2]]))
    D = product(("annulus", F(1, 2), 1), ("annulus", F(1, 2), 1))
    f = LaurentPolynomial.random(2, rng)
    assert parseval_residual(G, f, D, quad=QuadratureSpec(angular_points=32)) < 1e-6
    G1 = build_group(IntMatrix([[3]]))
    g = LaurentPolynomial.random(1, rng)
    assert parseval_residual(G1, g, annulus(F(1, 3), 1)) < 1e-6


def degree_four_polynomial(rng):
    exps = [k for k in itertools.product(range(5), repeat=2) if sum(k) <= 4]
    return LaurentPolynomial({k: complex(*rng.normal(size=2)) for k in exps})


@pytest.mark.acceptance(6, "norm identity on the ellipsoid")
def test_criterion_6_norm_identity():
    A = IntMatrix.diag(2, 2)
    G = build_group(A)
    f = degree_four_polynomial(np.random.default_rng(66))
    # |Π f|² has angular modes |j| ≤ 4, so an 8-point grid is exact in angle
    coarse = QuadratureSpec(angular_points=8)
    fine = QuadratureSpec(angular_points=12, refinement_tol=1e-12)
    reps = {chi: admissible_representative(chi, A, UNIT2, ball(2)) for chi in G.reps_GAt}
    for b in reps.values():
        rep = norm_identity_residual(G, b, f, UNIT2, Ellipsoid([2, 2]), coarse, omega2=UNIT2, D2=ball(2))
        assert rep.lhs > 0
        assert rep.residual < 1e-6
    b = max(reps.values(), key=sum)
    assert any(b)
    low, high = (norm_identity_residual(G, b, f, UNIT2, Ellipsoid([2, 2]), quad, omega2=UNIT2, D2=ball(2))
                 for quad in (coarse, fine))
    assert high.residual < 1e-6
    assert abs(low.lhs - high.lhs) <= 1e-6 * high.lhs
    assert abs(low.rhs - high.rhs) <= 1e-6 * high.rhs


@pytest.fixture(scope="module")
def ellipsoid_scenario():
    return DecompositionScenario(IntMatrix.diag(2, 2), Ellipsoid([2, 2]), ball(2), UNIT2,
                                 use_full_domains=True, kernel_tol=1e-12)


@pytest.mark.acceptance(7, "ellipsoid decomposition")
def test_criterion_7_ellipsoid_decomposition(ellipsoid_scenario):
    S = ellipsoid_scenario
    z, w = S.sample_points(20, seed=71), S.sample_points(20, seed=72)
    assert np.all(z != 0)
    assert decomposition_residual(S, z, w).max_residual < 1e-4
    diag = diagonal_residual(S, z)
    assert diag.max_residual < 1e-4
    for values in diag.terms.values():
        assert np.all(values >= 0)


@pytest.mark.acceptance(8, "Hartogs triangles")
@pytest.mark.parametrize("name", ["hartogs_p1q1", "hartogs_p2q1"])
def test_criterion_8_hartogs(name):
    S = load_scenario(shipped_scenario_path(name)).decomposition()
    z, w = S.sample_points(20, seed=81), S.sample_points(20, seed=82)
    rep = decomposition_residual(S, z, w)
    assert rep.max_residual < 1e-4
    if name == "hartogs_p1q1":
        W = z[:, 1] * np.conj(w[:, 1])
        Z = z[:, 0] * np.conj(w[:, 0])
        closed = 1 / (math.pi**2 * W * (1 - Z / W) ** 2 * (1 - W) ** 2)
        assert np.max(np.abs(rep.lhs - closed) / np.abs(closed)) < 1e-4


@pytest.mark.acceptance(9, "admissible weights and the strict inequality")
@pytest.mark.parametrize("domain, mu", [
    (disk(), (F(-1),)),
    (disk(), (F(-1, 2),)),
    (disk(), (F(0),)),
    (disk(), (F(1, 4),)),
    (disk(), (F(49, 100),)),
    (polydisk(1, F(1, 2)), (F(-1), F(0))),
], ids=["disk-1", "disk-1/2", "disk0", "disk1/4", "disk0.49", "bidisk"])
def test_criterion_9_full_equals_deleted(domain, mu):
    weight = WeightSpec(mu)
    assert is_admissible(weight, domain)
    full = build_kernel(domain, weight, tol=1e-12)
    deleted = build_kernel(domain.with_axes_deleted(True), weight, tol=1e-12)
    exact_full, exact_deleted = full.exact_coefficients(), deleted.exact_coefficients()
    assert exact_full is not None and exact_deleted is not None
    assert exact_full == exact_deleted


@pytest.mark.acceptance(9, "admissible weights and the strict inequality")
def test_criterion_9_strict_inequality():
    S = load_scenario(shipped_scenario_path("weighted_bidisk_gap")).decomposition()
    assert not is_admissible(S.omega1, S.D1.with_axes_deleted(False))
    rep = corollary_inequality(S, S.sample_points(10, seed=91))
    assert np.all(rep.slack > 0)


DELTAS = [(2, 2, 0.25), (4, 4, 0.2), (8, 8, 0.1)]


@pytest.fixture(scope="module")
def ball_values():
    cache = {}

    def value(delta):
        if delta not in cache:
            cache[delta] = monomial_ball_estimate(delta)
        return cache[delta]

    return value


@pytest.mark.acceptance(10, "monomial ball probe")
@pytest.mark.parametrize("delta", DELTAS, ids=str)
def test_criterion_10_comparability(delta, ball_values):
    est = ball_values(delta)
    assert 1 / 50 <= est.ratio <= 50


@pytest.mark.acceptance(10, "monomial ball probe")
@pytest.mark.parametrize("delta", DELTAS, ids=str)
def test_criterion_10_log_growth(delta, ball_values):
    d1, d2, d3 = delta
    growth = ball_values((2 * d1, d2, d3)).computed / ball_values(delta).computed
    assert 1.2 <= growth <= 4
