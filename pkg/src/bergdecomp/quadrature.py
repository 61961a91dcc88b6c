"""One-dimensional rules for radial integrals and the refinement driver.

Radial integrands on Reinhardt domains have algebraic endpoint singularities
(powers of r at 0, square roots of the boundary defining function at the
outer edge). Both the double-exponential rule and Gauss-Legendre panels
graded geometrically toward the endpoints converge quickly on such integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import QuadratureError

__all__ = ["QuadratureSpec", "graded_rule", "tanh_sinh_rule", "refine", "RefinedValue"]


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution policy for all quadratures.

    ``points_per_axis`` is the total node budget of the coarsest rule on one
    axis; each refinement adds grading levels and nodes per panel. A value
    is accepted once two successive refinements agree to ``refinement_tol``.
    """

    points_per_axis: int = 64
    refinement_tol: float = 1e-10
    max_refinements: int = 8
    grading: float = 0.2
    angular_points: int = 16

    def __post_init__(self):
        if self.points_per_axis < 4:
            raise ValueError("points_per_axis must be at least 4")
        if not 0 < self.grading < 1:
            raise ValueError("grading ratio must lie in (0, 1)")

    def level(self, i: int) -> tuple[int, int]:
        """(nodes per panel, grading levels) for refinement level ``i``."""
        per_panel = max(4, self.points_per_axis // 4) + 2 * i
        levels = 4 + 3 * i
        return per_panel, levels

    def to_dict(self) -> dict:
        return {
            "points_per_axis": self.points_per_axis,
            "refinement_tol": self.refinement_tol,
            "max_refinements": self.max_refinements,
            "grading": self.grading,
            "angular_points": self.angular_points,
        }


@lru_cache(maxsize=128)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _breakpoints(levels: int, grading: float, left: bool, right: bool) -> np.ndarray:
    """Breakpoints on [0, 1] refined geometrically toward the flagged ends."""
    pts = {0.0, 1.0}
    if left and right:
        pts.add(0.5)
        for i in range(1, levels + 1):
            h = 0.5 * grading**i
            pts.update((h, 1.0 - h))
    elif left:
        pts.update(grading**i for i in range(1, levels + 1))
    elif right:
        pts.update(1.0 - grading**i for i in range(1, levels + 1))
    return np.array(sorted(pts))


def graded_rule(a, b, per_panel: int, levels: int, grading: float = 0.2,
                left: bool = True, right: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [a, b]; ``a`` and ``b`` may be arrays of equal shape.

    Returns arrays of shape ``shape(a) + (N,)``.
    """
    x, w = _leggauss(per_panel)
    bp = _breakpoints(levels, grading, left, right)
    lo, hi = bp[:-1], bp[1:]
    t = (0.5 * (hi - lo)[:, None] * (x + 1.0) + lo[:, None]).ravel()
    wt = (0.5 * (hi - lo)[:, None] * w).ravel()
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    span = (b - a)[..., None]
    return a[..., None] + span * t, span * wt


@lru_cache(maxsize=32)
def tanh_sinh_rule(level: int, t_max: float = 5.0, h0: float = 0.25) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Double-exponential rule on [0, 1]: nodes ``x``, complements ``1 − x``, weights.

    The step halves with each level. Complements are computed directly so
    that endpoint singularities of either side are resolved to full precision.
    """
    h = h0 / 2**level
    t = np.arange(-math.floor(t_max / h), math.floor(t_max / h) + 1) * h
    s = 0.5 * math.pi * np.sinh(t)
    x = 1.0 / (1.0 + np.exp(-2 * s))
    xc = 1.0 / (1.0 + np.exp(2 * s))
    w = h * 0.5 * math.pi * np.cosh(t) / (2 * np.cosh(s) ** 2)
    return x, xc, w


@dataclass(frozen=True)
class RefinedValue:
    value: float
    achieved: float
    refinements: int


def refine(compute: Callable[[int], float], spec: QuadratureSpec, *, allow_divergence: bool = False) -> RefinedValue:
    """Evaluate ``compute(level)`` for increasing levels until two agree.

    With ``allow_divergence`` a sequence that keeps growing without
    settling is reported as ``inf`` instead of raising.
    """
    prev = compute(0)
    history = [prev]
    for i in range(1, spec.max_refinements + 1):
        cur = compute(i)
        history.append(cur)
        scale = max(abs(cur), abs(prev), np.finfo(float).tiny)
        diff = abs(cur - prev) / scale
        if diff <= spec.refinement_tol:
            return RefinedValue(cur, diff, i)
        prev = cur
    growing = all(abs(b) > abs(a) * (1 + 1e-6) for a, b in zip(history[-4:], history[-3:]))
    if allow_divergence and growing:
        return RefinedValue(math.inf, math.inf, spec.max_refinements)
    diff = abs(history[-1] - history[-2]) / max(abs(history[-1]), np.finfo(float).tiny)
    raise QuadratureError(
        f"quadrature did not converge: last relative change {diff:.3e} "
        f"exceeds {spec.refinement_tol:.1e}",
        achieved=diff,
    )
