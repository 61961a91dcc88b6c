import math
from fractions import Fraction

import numpy as np
import pytest

from bergdecomp import Ellipsoid, IntMatrix, WeightSpec, ball, build_kernel, disk, hartogs_triangle, polydisk
from bergdecomp.errors import ScenarioError
from bergdecomp.identities import (
    DecompositionScenario,
    _check_delta,
    bell_fiber_residual,
    corollary_inequality,
    decomposition_residual,
    diagonal_residual,
    monomial_ball_direct,
    monomial_ball_estimate,
    monomial_ball_model,
)
from bergdecomp.scenario import load_scenario, shipped_scenario_path

F = Fraction
UNIT1 = WeightSpec.unit(1)
UNIT2 = WeightSpec.unit(2)


def shipped(name):
    return load_scenario(shipped_scenario_path(name)).decomposition()


@pytest.fixture(scope="module")
def disk_squaring():
    return DecompositionScenario(IntMatrix([[2]]), disk(), disk(), UNIT1, use_full_domains=True,
                                 b_choices={(1,): (-1,)}, kernel_tol=1e-13)


def test_disk_decomposition(disk_squaring):
    S = disk_squaring
    z = S.sample_points(50, seed=1)
    w = S.sample_points(50, seed=2)
    rep = decomposition_residual(S, z, w)
    assert rep.max_residual < 1e-8
    closed = 1 / (math.pi * (1 - z[:, 0] * np.conj(w[:, 0])) ** 2)
    assert np.allclose(rep.lhs, closed, rtol=1e-10)


def test_disk_diagonal(disk_squaring):
    rep = diagonal_residual(disk_squaring, np.array([[0.5]]))
    assert math.isclose(rep.lhs[0], 1 / (math.pi * 0.75**2), rel_tol=1e-12)
    assert math.isclose(rep.rhs[0], rep.lhs[0], rel_tol=1e-10)
    assert all(v[0] >= 0 for v in rep.terms.values())


def test_disk_even_and_odd_parts(disk_squaring):
    # even part (K(z)+K(-z))/2 and odd part (K(z)-K(-z))/2 of 1/(π(1-x)^2)
    z = np.array([[0.3 + 0.2j]])
    w = np.array([[-0.1 + 0.4j]])
    x = complex(z[0, 0] * np.conj(w[0, 0]))
    full = lambda t: 1 / (math.pi * (1 - t) ** 2)  # noqa: E731
    rep = decomposition_residual(disk_squaring, z, w)
    even = disk_squaring.b_choices[(0,)]
    assert even == (0,)
    assert abs(rep.terms[(0,)][0] - (full(x) + full(-x)) / 2) < 1e-12
    assert abs(rep.terms[(1,)][0] - (full(x) - full(-x)) / 2) < 1e-12


@pytest.fixture(scope="module")
def ellipsoid():
    return DecompositionScenario(IntMatrix.diag(2, 2), Ellipsoid([2, 2]), ball(2), UNIT2,
                                 use_full_domains=True, kernel_tol=1e-12)


def test_ellipsoid_decomposition(ellipsoid):
    z = ellipsoid.sample_points(20, seed=11)
    w = ellipsoid.sample_points(20, seed=12)
    assert decomposition_residual(ellipsoid, z, w).max_residual < 1e-4
    rep = diagonal_residual(ellipsoid, np.array([[0.4, 0.3]]))
    assert rep.max_residual < 1e-4
    assert all(v[0] >= 0 for v in rep.terms.values())
    assert len(rep.terms) == 4


def test_ellipsoid_terms_use_ball_kernels(ellipsoid):
    # the trivial character term is the ball kernel with weight 1/4 |w1 w2|^{-1}
    K = ellipsoid.kernel2((0, 0))
    assert K.weight == WeightSpec((F(-1, 2), F(-1, 2)), F(1, 4))


def hartogs_closed_form(z, w):
    W = z[:, 1] * np.conj(w[:, 1])
    Z = z[:, 0] * np.conj(w[:, 0])
    return 1 / (math.pi**2 * W * (1 - Z / W) ** 2 * (1 - W) ** 2)


def test_hartogs_decomposition_and_closed_form():
    S = shipped("hartogs_p1q1")
    assert S.group.order == 1
    z = S.sample_points(20, seed=5)
    w = S.sample_points(20, seed=6)
    rep = decomposition_residual(S, z, w)
    assert rep.max_residual < 1e-4
    assert np.max(np.abs(rep.lhs - hartogs_closed_form(z, w)) / np.abs(rep.lhs)) < 1e-4


def test_hartogs_p2_q1():
    S = shipped("hartogs_p2q1")
    assert S.group.order == 2
    z = S.sample_points(20, seed=7)
    w = S.sample_points(20, seed=8)
    assert decomposition_residual(S, z, w).max_residual < 1e-4
    diag = diagonal_residual(S, z)
    assert diag.max_residual < 1e-4
    assert all(np.all(v >= 0) for v in diag.terms.values())


def test_bell_fiber_identity():
    A = IntMatrix.diag(2, 2)
    K1 = build_kernel(Ellipsoid([2, 2]), UNIT2, tol=1e-12)
    K2 = build_kernel(ball(2), UNIT2, tol=1e-12)
    rng = np.random.default_rng(3)
    z = Ellipsoid([2, 2]).sample(rng, 10, scale=0.7)
    # fibers of |v| < 0.6 stay inside the certified region of the ellipsoid series
    v = ball(2).sample(rng, 10, scale=0.6)
    assert np.max(bell_fiber_residual(A, None, K2, K1, z, v)) < 1e-8


def test_bell_fiber_identity_disk():
    A = IntMatrix([[3]])
    K = build_kernel(disk(), UNIT1, tol=1e-13)
    z = np.array([[0.2 + 0.1j], [-0.3j]])
    v = np.array([[0.5], [0.1 - 0.4j]])
    assert np.max(bell_fiber_residual(A, None, K, K, z, v)) < 1e-8


def test_inequality_strict_for_growing_weight():
    S = shipped("weighted_bidisk_gap")
    z = S.sample_points(10, seed=3)
    rep = corollary_inequality(S, z)
    assert rep.holds
    assert np.all(rep.slack > 0)
    assert rep.min_relative_slack > 1e-3


def test_inequality_equality_for_trivial_group():
    S = DecompositionScenario(IntMatrix.identity(1), disk(), disk(), UNIT1)
    rep = corollary_inequality(S, S.sample_points(10, seed=4))
    assert rep.holds
    assert np.max(np.abs(rep.slack / rep.full)) < 1e-10


def test_inequality_is_equality_when_punctures_are_removable():
    S = DecompositionScenario(IntMatrix([[2]]), disk(), disk(), UNIT1, b_choices={(1,): (-1,)}, kernel_tol=1e-13)
    rep = corollary_inequality(S, S.sample_points(10, seed=5))
    assert np.max(np.abs(rep.slack / rep.full)) < 1e-10


def test_inequality_rejects_full_mode(disk_squaring):
    with pytest.raises(ScenarioError):
        corollary_inequality(disk_squaring, np.array([[0.1]]))


def test_residual_shrinks_with_kernel_tolerance():
    residuals = []
    z = np.array([[0.4, 0.3], [0.2 - 0.3j, 0.5j]])
    for tol in (1e-2, 1e-4, 1e-6):
        S = DecompositionScenario(IntMatrix.diag(2, 2), Ellipsoid([2, 2]), ball(2), UNIT2,
                                  use_full_domains=True, kernel_tol=tol)
        residuals.append(diagonal_residual(S, z).max_residual)
    assert residuals[0] >= residuals[1] >= residuals[2]
    assert residuals[2] < 1e-4


def test_full_and_deleted_modes_agree():
    full = DecompositionScenario(IntMatrix([[2]]), disk(), disk(), UNIT1, use_full_domains=True,
                                 b_choices={(1,): (-1,)}, kernel_tol=1e-13)
    deleted = DecompositionScenario(IntMatrix([[2]]), disk(), disk(), UNIT1, b_choices={(1,): (-1,)},
                                    kernel_tol=1e-13)
    z = full.sample_points(10, seed=9)
    assert np.allclose(decomposition_residual(full, z, z[::-1]).rhs,
                       decomposition_residual(deleted, z, z[::-1]).rhs, rtol=1e-12)


def test_scenario_validation_errors():
    with pytest.raises(ScenarioError):
        DecompositionScenario(IntMatrix.diag(2, 2), disk(), disk(), UNIT1)
    with pytest.raises(ScenarioError, match="does not represent"):
        DecompositionScenario(IntMatrix([[2]]), disk(), disk(), UNIT1, b_choices={(1,): (0,)})
    with pytest.raises(ScenarioError, match="not admissible"):
        DecompositionScenario(IntMatrix([[2]]), disk(), disk(), UNIT1, use_full_domains=True, b_choices={(1,): (-3,)})
    with pytest.raises(ScenarioError, match="pullback"):
        DecompositionScenario(IntMatrix([[2]]), disk(), disk(), UNIT1, omega1=WeightSpec((1,)))


def test_check_mapping():
    good = DecompositionScenario(IntMatrix.diag(2, 2), Ellipsoid([2, 2]), ball(2), UNIT2, use_full_domains=True)
    assert good.check_mapping(samples=200)["ok"]
    bad = DecompositionScenario(IntMatrix.diag(2, 2), ball(2), polydisk(F(1, 4), F(1, 4)), UNIT2,
                               use_full_domains=True)
    report = bad.check_mapping(samples=200)
    assert not report["ok"]
    with pytest.raises(ScenarioError):
        bad.validate(samples=200)


def test_hartogs_mapping():
    S = shipped("hartogs_p2q1")
    assert S.D1 == hartogs_triangle(2, 1)
    assert S.check_mapping(samples=200)["ok"]


@pytest.mark.parametrize("delta", [(2, 2, 0.25), (3, 2, 0.2)])
def test_monomial_ball_product_model(delta):
    value, _, _ = monomial_ball_direct(delta, product_model=True, level=1, angular=128)
    assert math.isclose(value, monomial_ball_model(delta), rel_tol=1e-8)


def test_monomial_ball_grows_as_delta3_shrinks():
    big = monomial_ball_estimate((2, 2, 0.25), level=1, angular=128)
    small = monomial_ball_estimate((2, 2, 0.2), level=1, angular=128)
    assert small.computed > big.computed
    assert small.model > big.model
    assert 0.02 <= small.ratio <= 50


def test_monomial_ball_parameter_checks():
    for delta in [(1, 2, 0.2), (2, 2, 0.5), (2, 2, 0)]:
        with pytest.raises(ValueError):
            _check_delta(delta)
