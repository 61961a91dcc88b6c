"""Reinhardt domains, monomial weights and the weight transform b ↦ η_b.

Two shape families cover every domain used here:

* :class:`MonomialRegion` -- ``l_j < F_{p_j}(r) < u_j`` for n independent
  exponent rows ``p_j``. In logarithmic coordinates ``y = P·log r`` the
  shadow is a box, so monomial norms factor into one-dimensional
  exponential integrals. Disks, annuli, polydisks and Hartogs-type
  triangles are all of this form.
* :class:`Ellipsoid` -- ``Σ r_j^{2p_j} < 1``, with Dirichlet-integral norms.

A :class:`Validity` describes the compact sub-region on which a truncated
kernel series is certified: the shadow shrunk by a factor along each
defining monomial, optionally cut away from the axes by a floor.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DimensionError, ScenarioError
from .group import CosetRep
from .intlin import IntMatrix, RatMatrix, rational_inverse, vec_mat
from .monomial import as_points
from .quadrature import QuadratureSpec, refine, tanh_sinh_rule

__all__ = [
    "to_fraction",
    "Validity",
    "ReinhardtDomain",
    "MonomialRegion",
    "Ellipsoid",
    "disk",
    "punctured_disk",
    "annulus",
    "polydisk",
    "product",
    "ball",
    "hartogs_triangle",
    "domain_from_dict",
    "WeightSpec",
    "weight_c",
    "eta_weight",
    "pullback_weight",
    "is_admissible",
    "admissible_representative",
]


def to_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, "p/q" string or float (via its repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ScenarioError(f"not a rational number: {x!r}") from exc
    return Fraction(x)


def _lcm_denominator(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


@dataclass(frozen=True)
class Validity:
    """Certified evaluation region of a kernel series.

    ``shrink`` pulls every upper bound in (and lower bounds out); ``floor``
    keeps floored coordinates at least ``floor`` times their upper bound.
    ``floored`` selects coordinates (None means all coordinates that can
    reach zero).
    """

    shrink: float = 0.8
    floor: float = 0.05
    floored: tuple[bool, ...] | None = None

    def __post_init__(self):
        if not 0 < self.shrink <= 1:
            raise ValueError("shrink must lie in (0, 1]")
        if not 0 < self.floor < self.shrink:
            raise ValueError("floor must lie in (0, shrink)")

    def is_floored(self, j: int) -> bool:
        return True if self.floored is None else bool(self.floored[j])

    def to_dict(self) -> dict:
        return {
            "shrink": self.shrink,
            "floor": self.floor,
            "floored": None if self.floored is None else list(self.floored),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Validity":
        fl = d.get("floored")
        return cls(d["shrink"], d["floor"], None if fl is None else tuple(bool(x) for x in fl))


class ReinhardtDomain(ABC):
    """A domain invariant under independent rotations of each coordinate."""

    n: int
    axes_deleted: bool

    # -- membership --------------------------------------------------------
    @abstractmethod
    def contains_radii(self, r) -> np.ndarray:
        """Whether moduli ``r`` (zeros allowed) lie in the radial shadow."""

    def contains(self, z) -> np.ndarray | bool:
        z = as_points(z, self.n)
        inside = self.contains_radii(np.abs(z))
        if self.axes_deleted:
            inside = inside & np.all(z != 0, axis=-1)
        return inside[()] if np.ndim(inside) == 0 else inside

    @abstractmethod
    def shadow_reaches_axis(self, j: int) -> bool:
        """Whether the shadow contains points with ``r_j = 0``."""

    def axis_meets(self, j: int) -> bool:
        return not self.axes_deleted and self.shadow_reaches_axis(j)

    def meeting_axes(self) -> tuple[bool, ...]:
        return tuple(self.axis_meets(j) for j in range(self.n))

    @abstractmethod
    def with_axes_deleted(self, flag: bool = True) -> "ReinhardtDomain":
        ...

    # -- radial integrals of ∏ r_j^{s_j - 1} ------------------------------
    @abstractmethod
    def log_radial_integral(self, s: np.ndarray) -> np.ndarray:
        """log ∫_shadow ∏ r_j^{s_j−1} dr for rows of ``s``; +inf where divergent."""

    @abstractmethod
    def exact_radial_integral(self, s: Sequence[Fraction]) -> Fraction | None:
        """The same integral as an exact rational, or None if it is not rational."""

    @abstractmethod
    def radial_rule(self, level: int, spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
        """Radial nodes ``(N, n)`` and weights ``(N,)`` for ∫_shadow · dr."""

    def quadrature_radial_integral(self, s: Sequence, spec: QuadratureSpec | None = None) -> float:
        """∫_shadow ∏ r_j^{s_j−1} dr by refined quadrature (inf when it diverges)."""
        spec = spec or QuadratureSpec()
        s = np.asarray([float(x) for x in s])

        def compute(level):
            R, W = self.radial_rule(level, spec)
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = np.prod(R ** (s - 1.0), axis=-1)
            return float(np.sum(W * vals))

        return refine(compute, spec, allow_divergence=True).value

    def integrate(self, g, spec: QuadratureSpec | None = None, *, level: int | None = None,
                  chunk: int = 4096) -> float | complex:
        """∫_D g(z) dV(z) with a radial rule times a uniform angular grid.

        ``g`` receives arrays of points of shape ``(..., n)``. With ``level``
        the rule at that single refinement level is used; otherwise levels
        are refined until successive values agree.
        """
        spec = spec or QuadratureSpec()
        m = spec.angular_points
        grid = np.stack(np.meshgrid(*([np.arange(m) / m] * self.n), indexing="ij"), axis=-1).reshape(-1, self.n)
        rot = np.exp(2j * math.pi * grid)

        def compute(lvl):
            R, W = self.radial_rule(lvl, spec)
            total = 0.0
            for start in range(0, len(R), chunk):
                r = R[start:start + chunk]
                w = W[start:start + chunk] * np.prod(2 * math.pi * r, axis=-1)
                pts = r[:, None, :] * rot[None, :, :]
                vals = np.asarray(g(pts))
                total = total + np.sum(w * vals.mean(axis=-1))
            return total

        if level is not None:
            return compute(level)
        if np.iscomplexobj(compute(0)):
            # judged on the modulus: a vanishing part has no relative accuracy of its own
            return complex(refine(lambda lvl: complex(compute(lvl)), spec).value)
        return refine(lambda lvl: float(compute(lvl)), spec).value

    # -- validity regions ------------------------------------------------
    @abstractmethod
    def log_sup(self, k: np.ndarray, validity: Validity) -> np.ndarray:
        """sup over the validity region of log|F_k|, row-wise (may be +inf)."""

    @abstractmethod
    def log_inf(self, k: np.ndarray, validity: Validity) -> np.ndarray:
        """inf of log|F_k| over the validity region with every coordinate floored."""

    @abstractmethod
    def in_validity(self, z, validity: Validity) -> np.ndarray:
        ...

    @abstractmethod
    def describe_validity(self, validity: Validity) -> str:
        ...

    @abstractmethod
    def sample(self, rng: np.random.Generator, count: int, scale: float = 0.7,
               floor: float = 0.1) -> np.ndarray:
        """Seeded off-axes points inside the ``scale``-shrunk shadow."""

    @abstractmethod
    def image_under(self, A: IntMatrix) -> "ReinhardtDomain":
        """The domain Φ_A(D) where this is expressible in the same family."""

    @abstractmethod
    def to_dict(self) -> dict:
        ...


def _logs(r: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(r, dtype=float))


def _monomial_logs(logr: np.ndarray, P: np.ndarray) -> np.ndarray:
    """``P·log r`` row-wise, treating 0·(−inf) as 0."""
    out = np.zeros(logr.shape[:-1] + (P.shape[0],))
    for j in range(P.shape[0]):
        acc = np.zeros(logr.shape[:-1])
        for i in range(P.shape[1]):
            if P[j, i] != 0:
                acc = acc + P[j, i] * logr[..., i]
        out[..., j] = acc
    return out


class MonomialRegion(ReinhardtDomain):
    """``{ r : l_j < F_{p_j}(r) < u_j }`` with an invertible exponent matrix.

    A lower bound of ``None`` means no constraint (the monomial may vanish);
    ``0`` means the strict constraint ``F_{p_j}(r) > 0``.
    """

    def __init__(self, exponents, lower, upper, axes_deleted: bool = False, label: str | None = None):
        self.P = RatMatrix(exponents)
        self.n = self.P.n
        if len(lower) != self.n or len(upper) != self.n:
            raise DimensionError("need one lower and one upper bound per exponent row")
        self.lower = tuple(None if l is None else to_fraction(l) for l in lower)
        self.upper = tuple(to_fraction(u) for u in upper)
        for l, u in zip(self.lower, self.upper):
            if u <= 0 or (l is not None and (l < 0 or l >= u)):
                raise ValueError(f"bad bounds ({l}, {u})")
        self.Pinv = rational_inverse(self.P)
        self.axes_deleted = bool(axes_deleted)
        self.label = label
        self._Pf = np.array([[float(x) for x in r] for r in self.P.rows])
        self._Pinvf = np.array([[float(x) for x in r] for r in self.Pinv.rows])
        den = _lcm_denominator(x for r in self.Pinv.rows for x in r)
        self._pinv_den = den
        self._pinv_int = np.array([[int(x * den) for x in r] for r in self.Pinv.rows], dtype=np.int64)
        self._abs_det = abs(float(_rat_det(self.P)))
        self._hi = np.array([math.log(u) for u in self.upper])
        self._lo = np.array([-math.inf if (l is None or l == 0) else math.log(l) for l in self.lower])

    def __repr__(self):
        return (f"MonomialRegion(P={[[str(x) for x in r] for r in self.P.rows]}, lower={self.lower}, "
                f"upper={self.upper}, axes_deleted={self.axes_deleted})")

    def __eq__(self, other):
        return isinstance(other, MonomialRegion) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(repr(self))

    def contains_radii(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        with np.errstate(invalid="ignore"):
            y = _monomial_logs(_logs(r), self._Pf)
            ok = np.all(y < self._hi, axis=-1)
            for j, l in enumerate(self.lower):
                if l is None:
                    ok &= ~np.isnan(y[..., j])
                elif l == 0:
                    ok &= y[..., j] > -math.inf
                else:
                    ok &= y[..., j] > math.log(l)
        return ok

    def shadow_reaches_axis(self, j: int) -> bool:
        col = self.P.col(j)
        return all(p >= 0 for p in col) and all(
            self.lower[i] is None for i, p in enumerate(col) if p > 0
        )

    def with_axes_deleted(self, flag: bool = True) -> "MonomialRegion":
        return MonomialRegion(self.P.rows, self.lower, self.upper, flag, self.label)

    # exponent s ↦ t = s·P⁻¹ with exact sign decisions
    def _t(self, s: np.ndarray, s_den: int = 1) -> tuple[np.ndarray, np.ndarray]:
        """``(t, sign(t))`` for integer rows ``s_den·s``."""
        num = np.asarray(s, dtype=np.int64) @ self._pinv_int
        return num / float(self._pinv_den * s_den), np.sign(num)

    def log_radial_integral(self, s, s_den: int = 1) -> np.ndarray:
        """Rows of ``s`` are given as integers scaled by ``s_den``."""
        t, sign = self._t(s, s_den)
        lo, hi = self._lo, self._hi
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            pos = t * hi - np.log(np.abs(t)) + np.log1p(-np.exp(t * (lo - hi)))
            neg = t * lo - np.log(np.abs(t)) + np.log1p(-np.exp(t * (hi - lo)))
            zero = np.log(hi - lo) + 0 * t
        out = np.where(sign > 0, pos, np.where(sign < 0, neg, zero))
        out = np.where(np.isfinite(lo) | (sign > 0), out, math.inf)
        return np.sum(out, axis=-1) - math.log(self._abs_det)

    def exact_radial_integral(self, s) -> Fraction | None:
        s = [Fraction(x) for x in s]
        t = vec_mat(s, self.Pinv.rows)
        total = 1 / abs(_rat_det(self.P))
        for tj, l, u in zip(t, self.lower, self.upper):
            if tj == 0:
                return None
            if l is None or l == 0:
                if tj < 0:
                    return None
                top, bottom = _rat_pow(u, tj), Fraction(0)
            else:
                top, bottom = _rat_pow(u, tj), _rat_pow(l, tj)
            if top is None or bottom is None:
                return None
            total *= (top - bottom) / tj
        return total

    def _y_rule(self, j: int, level: int, spec: QuadratureSpec):
        """Nodes and weights for ∫ dy over the j-th log band.

        A finite band gets Gauss-Legendre panels (the integrand is smooth
        there). A half-line band is pulled back through x = exp(y − hi),
        turning the exponential decay into an algebraic endpoint that
        tanh-sinh resolves.
        """
        hi, lo = self._hi[j], self._lo[j]
        if math.isfinite(lo):
            per_panel, _ = spec.level(level)
            panels = max(1, math.ceil((hi - lo) * (1 + level / 2) / 2))
            x, w = np.polynomial.legendre.leggauss(per_panel)
            edges = np.linspace(lo, hi, panels + 1)
            a, b = edges[:-1, None], edges[1:, None]
            return (0.5 * (b - a) * (x + 1) + a).ravel(), (0.5 * (b - a) * w).ravel()
        x, _, w = tanh_sinh_rule(level)
        return hi + np.log(x), w / x

    def radial_rule(self, level: int, spec: QuadratureSpec):
        rules = [self._y_rule(j, level, spec) for j in range(self.n)]
        Y = np.stack(np.meshgrid(*[r[0] for r in rules], indexing="ij"), -1).reshape(-1, self.n)
        Wy = np.prod(np.stack(np.meshgrid(*[r[1] for r in rules], indexing="ij"), -1).reshape(-1, self.n), -1)
        R = np.exp(Y @ self._Pinvf.T)
        return R, Wy * np.prod(R, axis=-1) / self._abs_det

    def quadrature_radial_integral(self, s, spec: QuadratureSpec | None = None) -> float:
        """Per-constraint exponential integrals in log coordinates, each refined independently."""
        spec = spec or QuadratureSpec()
        t = vec_mat([Fraction(x) for x in s], self.Pinv.rows)
        total = 1.0 / self._abs_det
        for j, tj in enumerate(t):
            tj = float(tj)

            def compute(level, j=j, tj=tj):
                y, w = self._y_rule(j, level, spec)
                return float(np.sum(w * np.exp(tj * y)))

            total *= refine(compute, spec, allow_divergence=not math.isfinite(self._lo[j])).value
        return total

    # validity: a box in y = P·log r
    def _box(self, validity: Validity, all_floored: bool = False) -> tuple[np.ndarray, np.ndarray]:
        hi = self._hi + math.log(validity.shrink)
        lo = np.empty(self.n)
        for j, l in enumerate(self.lower):
            if l is not None and l > 0:
                lo[j] = math.log(l) - math.log(validity.shrink)
            elif all_floored or validity.is_floored(j):
                lo[j] = self._hi[j] + math.log(validity.floor)
            else:
                lo[j] = -math.inf
        return lo, hi

    def log_sup(self, k, validity: Validity) -> np.ndarray:
        lo, hi = self._box(validity)
        t, sign = self._t(k)
        with np.errstate(invalid="ignore"):
            vals = np.where(sign > 0, t * hi, np.where(sign < 0, t * lo, 0.0))
        return np.sum(vals, axis=-1)

    def log_inf(self, k, validity: Validity) -> np.ndarray:
        lo, hi = self._box(validity, all_floored=True)
        t, sign = self._t(k)
        vals = np.where(sign > 0, t * lo, np.where(sign < 0, t * hi, 0.0))
        return np.sum(vals, axis=-1)

    def in_validity(self, z, validity: Validity) -> np.ndarray:
        z = as_points(z, self.n)
        lo, hi = self._box(validity)
        with np.errstate(invalid="ignore"):
            y = _monomial_logs(_logs(np.abs(z)), self._Pf)
            ok = np.all((y <= hi + 1e-12) & (y >= lo - 1e-12), axis=-1)
        return ok & np.asarray(self.contains(z))

    def describe_validity(self, validity: Validity) -> str:
        lo, hi = self._box(validity)
        parts = []
        for j in range(self.n):
            mono = "·".join(f"r{i + 1}^{p}" for i, p in enumerate(self.P.row(j)) if p != 0)
            a = "0" if not math.isfinite(lo[j]) else f"{math.exp(lo[j]):.6g}"
            parts.append(f"{a} <= {mono} <= {math.exp(hi[j]):.6g}")
        return "; ".join(parts)

    def sample(self, rng, count, scale=0.7, floor=0.1) -> np.ndarray:
        y = np.empty((count, self.n))
        for j, (l, u) in enumerate(zip(self.lower, self.upper)):
            top = float(u) * scale
            bottom = float(l) / scale if (l is not None and l > 0) else float(u) * floor
            if bottom >= top:
                raise ValueError("sampling band is empty; increase scale")
            y[:, j] = np.log(rng.uniform(bottom, top, count))
        r = np.exp(y @ self._Pinvf.T)
        theta = rng.uniform(0.0, 1.0, (count, self.n))
        return r * np.exp(2j * math.pi * theta)

    def image_under(self, A: IntMatrix) -> "MonomialRegion":
        newP = self.P @ rational_inverse(A)
        return MonomialRegion(newP.rows, self.lower, self.upper, self.axes_deleted)

    def to_dict(self) -> dict:
        return {
            "shape": "monomial_region",
            "exponents": [[str(x) for x in r] for r in self.P.rows],
            "lower": [None if l is None else str(l) for l in self.lower],
            "upper": [str(u) for u in self.upper],
            "axes_deleted": self.axes_deleted,
        }


def _rat_pow(x, t: Fraction) -> Fraction | None:
    """``x**t`` when it is rational for certain (integer ``t``, or ``x`` equal to 1)."""
    if t.denominator == 1:
        return Fraction(x) ** int(t)
    return Fraction(1) if x == 1 else None


def _rat_det(M: RatMatrix) -> Fraction:
    a = [list(r) for r in M.rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


class Ellipsoid(ReinhardtDomain):
    """``{ Σ r_j^{2p_j} < 1 }``; p = (1, …, 1) is the unit ball."""

    def __init__(self, p: Sequence, axes_deleted: bool = False):
        self.p = tuple(to_fraction(x) for x in p)
        if any(x <= 0 for x in self.p):
            raise ValueError("ellipsoid exponents must be positive")
        self.n = len(self.p)
        self.axes_deleted = bool(axes_deleted)
        self._pf = np.array([float(x) for x in self.p])

    def __repr__(self):
        return f"Ellipsoid(p={[str(x) for x in self.p]}, axes_deleted={self.axes_deleted})"

    def __eq__(self, other):
        return isinstance(other, Ellipsoid) and self.p == other.p and self.axes_deleted == other.axes_deleted

    def __hash__(self):
        return hash(repr(self))

    def contains_radii(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return np.sum(r ** (2 * self._pf), axis=-1) < 1.0

    def shadow_reaches_axis(self, j: int) -> bool:
        return True

    def with_axes_deleted(self, flag: bool = True) -> "Ellipsoid":
        return Ellipsoid(self.p, flag)

    def log_radial_integral(self, s, s_den: int = 1) -> np.ndarray:
        s = np.asarray(s, dtype=float) / s_den
        alpha = s / (2 * self._pf)
        with np.errstate(invalid="ignore"):
            val = (np.sum(gammaln(alpha) - np.log(2 * self._pf), axis=-1)
                   - gammaln(1 + np.sum(alpha, axis=-1)))
        return np.where(np.all(alpha > 0, axis=-1), val, math.inf)

    def exact_radial_integral(self, s) -> Fraction | None:
        alpha = [Fraction(x) / (2 * p) for x, p in zip(s, self.p)]
        if any(a.denominator != 1 or a <= 0 for a in alpha):
            return None
        num = math.prod(math.factorial(int(a) - 1) for a in alpha)
        val = Fraction(num, math.factorial(int(sum(alpha))))
        for p in self.p:
            val /= 2 * p
        return val

    def radial_rule(self, level: int, spec: QuadratureSpec):
        """Stick-breaking map of the cube onto the simplex ``Σ r_j^{2p_j} < 1``.

        With ``u_j = x_j·∏_{i<j}(1 − x_i)`` and ``r_j = u_j^{1/(2p_j)}`` every
        singularity sits on a cube face, where a double-exponential rule
        converges rapidly.
        """
        x, xc, w = tanh_sinh_rule(level)
        grids = np.meshgrid(*([np.arange(len(x))] * self.n), indexing="ij")
        idx = np.stack([g.ravel() for g in grids], axis=-1)
        X, XC, Wx = x[idx], xc[idx], w[idx]
        U = np.empty_like(X)
        rest = np.ones(len(X))
        for j in range(self.n):
            U[:, j] = X[:, j] * rest
            rest = rest * XC[:, j]
        jac = np.prod(Wx, axis=-1) * np.prod(XC ** np.arange(self.n - 1, -1, -1), axis=-1)
        inv = 1.0 / (2 * self._pf)
        R = U**inv
        W = jac * np.prod(inv * U ** (inv - 1.0), axis=-1)
        return R, W

    def _sup_positive(self, weights: np.ndarray, budget: np.ndarray, shrink: float) -> np.ndarray:
        """max Σ w_j log r_j subject to Σ (r_j/shrink)^{2p_j} ≤ budget, w ≥ 0."""
        c = weights / (2 * self._pf)
        total = np.sum(c, axis=-1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(c > 0, budget[..., None] * c / np.where(total > 0, total, 1.0), 1.0)
            terms = np.where(c > 0, weights * (math.log(shrink) + np.log(u) / (2 * self._pf)), 0.0)
        return np.sum(terms, axis=-1)

    def log_sup(self, k, validity: Validity) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        floored = np.array([validity.is_floored(j) for j in range(self.n)])
        lf = math.log(validity.floor)
        fixed = k <= 0
        bad = np.any((k < 0) & ~floored, axis=-1)
        cost = np.where(fixed & floored, (validity.floor / validity.shrink) ** (2 * self._pf), 0.0)
        budget = 1.0 - np.sum(cost, axis=-1)
        base = np.sum(np.where(k < 0, k * lf, 0.0), axis=-1)
        val = base + self._sup_positive(np.where(k > 0, k, 0.0), budget, validity.shrink)
        return np.where(bad, math.inf, val)

    def log_inf(self, k, validity: Validity) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        lf = math.log(validity.floor)
        fixed = k >= 0
        cost = np.where(fixed, (validity.floor / validity.shrink) ** (2 * self._pf), 0.0)
        budget = 1.0 - np.sum(cost, axis=-1)
        base = np.sum(np.where(k > 0, k * lf, 0.0), axis=-1)
        return base - self._sup_positive(np.where(k < 0, -k, 0.0), budget, validity.shrink)

    def in_validity(self, z, validity: Validity) -> np.ndarray:
        z = as_points(z, self.n)
        r = np.abs(z)
        ok = np.sum((r / validity.shrink) ** (2 * self._pf), axis=-1) <= 1.0 + 1e-12
        for j in range(self.n):
            if validity.is_floored(j):
                ok &= r[..., j] >= validity.floor * (1 - 1e-12)
        return ok & np.asarray(self.contains(z))

    def describe_validity(self, validity: Validity) -> str:
        terms = " + ".join(f"(r{j + 1}/{validity.shrink})^{2 * p}" for j, p in enumerate(self.p))
        floors = [f"r{j + 1} >= {validity.floor}" for j in range(self.n) if validity.is_floored(j)]
        return "; ".join([f"{terms} <= 1"] + floors)

    def sample(self, rng, count, scale=0.7, floor=0.1) -> np.ndarray:
        out = []
        while len(out) < count:
            r = rng.uniform(floor, scale, (4 * count, self.n))
            keep = np.sum((r / scale) ** (2 * self._pf), axis=-1) <= 1.0
            out.extend(r[keep])
        r = np.array(out[:count])
        theta = rng.uniform(0.0, 1.0, (count, self.n))
        return r * np.exp(2j * math.pi * theta)

    def image_under(self, A: IntMatrix) -> "Ellipsoid":
        if any(A[i, j] != 0 for i in range(A.n) for j in range(A.n) if i != j) or any(
            A[i, i] <= 0 for i in range(A.n)
        ):
            raise NotImplementedError("ellipsoid images are only available for positive diagonal maps")
        return Ellipsoid([p / A[i, i] for i, p in enumerate(self.p)], self.axes_deleted)

    def to_dict(self) -> dict:
        return {"shape": "ellipsoid", "p": [str(x) for x in self.p], "axes_deleted": self.axes_deleted}


# -- constructors ---------------------------------------------------------

def _factor(kind: str, *params):
    kind = kind.lower()
    if kind == "disk":
        (R,) = params
        return None, R
    if kind == "punctured_disk":
        (R,) = params
        return 0, R
    if kind == "annulus":
        r0, r1 = params
        return r0, r1
    raise ScenarioError(f"unknown radial factor {kind!r}")


def product(*factors, axes_deleted: bool = False) -> MonomialRegion:
    """Product of radial factors given as ("disk", R), ("annulus", r0, r1), ("punctured_disk", R)."""
    bounds = [_factor(*f) for f in factors]
    n = len(bounds)
    eye = [[int(i == j) for j in range(n)] for i in range(n)]
    return MonomialRegion(eye, [b[0] for b in bounds], [b[1] for b in bounds], axes_deleted)


def disk(R=1, axes_deleted: bool = False) -> MonomialRegion:
    return product(("disk", R), axes_deleted=axes_deleted)


def punctured_disk(R=1) -> MonomialRegion:
    return product(("punctured_disk", R))


def annulus(r0, r1) -> MonomialRegion:
    return product(("annulus", r0, r1))


def polydisk(*radii, axes_deleted: bool = False) -> MonomialRegion:
    return product(*(("disk", R) for R in radii), axes_deleted=axes_deleted)


def ball(n: int = 2, axes_deleted: bool = False) -> Ellipsoid:
    return Ellipsoid([1] * n, axes_deleted)


def hartogs_triangle(p: int = 1, q: int = 1) -> MonomialRegion:
    """``{0 < |z1|^p < |z2|^q < 1}``; it never meets the axes."""
    return MonomialRegion([[p, -q], [0, q]], [0, None], [1, 1], axes_deleted=False)


def domain_from_dict(d: dict) -> ReinhardtDomain:
    """Build a domain from its serialized form (also the scenario-file form)."""
    try:
        shape = d["shape"]
        deleted = bool(d.get("axes_deleted", False))
        if shape == "ellipsoid":
            return Ellipsoid(d["p"], deleted)
        if shape == "monomial_region":
            lower = [None if (l is None or l == "none") else l for l in d["lower"]]
            return MonomialRegion([[to_fraction(x) for x in r] for r in d["exponents"]], lower, d["upper"], deleted)
        if shape == "product":
            factors = [tuple(f) for f in d["factors"]]
            return product(*factors, axes_deleted=deleted)
        if shape == "ball":
            return ball(int(d.get("n", 2)), deleted)
        if shape == "disk":
            return disk(d.get("radius", 1), deleted)
        if shape == "hartogs":
            dom = hartogs_triangle(int(d["p"]), int(d["q"]))
            return dom.with_axes_deleted(deleted) if deleted else dom
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad domain specification {d!r}: {exc}") from exc
    raise ScenarioError(f"unknown domain shape {d.get('shape')!r}")


# -- weights ----------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """``ω(z) = scale·∏ |z_j|^{2μ_j}``."""

    mu: tuple[Fraction, ...]
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(to_fraction(x) for x in self.mu))
        object.__setattr__(self, "scale", to_fraction(self.scale))
        if self.scale <= 0:
            raise ValueError("weight scale must be positive")

    @classmethod
    def unit(cls, n: int) -> "WeightSpec":
        return cls((0,) * n, 1)

    @property
    def n(self) -> int:
        return len(self.mu)

    def __call__(self, z) -> np.ndarray:
        z = as_points(z, self.n)
        r = np.abs(z)
        with np.errstate(divide="ignore"):
            return float(self.scale) * np.prod(r ** (2 * np.array([float(m) for m in self.mu])), axis=-1)

    def to_dict(self) -> dict:
        return {"mu": [str(m) for m in self.mu], "scale": str(self.scale)}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSpec":
        return cls(tuple(d["mu"]), d.get("scale", 1))


def _int_vec(b) -> tuple[int, ...]:
    v = b.m if isinstance(b, CosetRep) else b
    return tuple(int(x) for x in v)


def weight_c(b, A: IntMatrix) -> tuple[Fraction, ...]:
    """``c(b) = (1 − b)·A⁻¹ − 1``."""
    b = _int_vec(b)
    if len(b) != A.n:
        raise DimensionError("exponent length does not match the matrix")
    row = vec_mat([Fraction(1 - x) for x in b], rational_inverse(A).rows)
    return tuple(x - 1 for x in row)


def eta_weight(b, A: IntMatrix, omega2: WeightSpec) -> WeightSpec:
    """``η_b = |det A|⁻¹·|F_c|²·ω₂`` with ``c = c(b)``."""
    c = weight_c(b, A)
    return WeightSpec(tuple(x + m for x, m in zip(c, omega2.mu)), omega2.scale / abs(A.det()))


def pullback_weight(omega2: WeightSpec, A: IntMatrix) -> WeightSpec:
    """``ω₂∘Φ_A`` as a monomial weight: exponent ``μ·A``, same scale."""
    return WeightSpec(vec_mat(list(omega2.mu), A.rows), omega2.scale)


def is_admissible(w: WeightSpec, D: ReinhardtDomain) -> bool:
    """``μ_j < 1/2`` on every axis that meets D."""
    return all(m < Fraction(1, 2) for j, m in enumerate(w.mu) if D.axis_meets(j))


def admissible_representative(chi, A: IntMatrix, omega2: WeightSpec, D2: ReinhardtDomain) -> tuple[int, ...]:
    """A character representative b with η_b admissible on D2.

    Starting from the representative carried by ``chi``, shift by ``m·A``
    with ``m_j = max(0, ⌈c_j + μ_j⌉)`` on axes meeting D2; this lowers
    ``c_j`` by ``m_j`` and leaves the character unchanged.
    """
    bstar = _int_vec(chi)
    c = weight_c(bstar, A)
    m = [
        max(0, math.ceil(cj + mu)) if D2.axis_meets(j) else 0
        for j, (cj, mu) in enumerate(zip(c, omega2.mu))
    ]
    shift = vec_mat(m, A.rows)
    return tuple(b + s for b, s in zip(bstar, shift))

