"""Kernel identities for monomial maps between Reinhardt domains.

For ``Φ_A: D1 → D2`` the kernel of D1 splits over the characters of the
deck group:

    B_{D1}(z, w; ω₁) = Σ_χ F_{−b}(z)·B_{D2}(Φz, Φw; η_b)·conj(F_{−b}(w)),

with ``b`` any representative of χ (admissible ones in full-domain mode).
This module builds both sides from independent kernel series and reports
the residuals, plus the transformation law over fibers and the monomial
ball probe.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .bergman import KernelSeries, build_kernel, kernel_diag, kernel_eval
from .domains import (
    ReinhardtDomain,
    Validity,
    WeightSpec,
    admissible_representative,
    eta_weight,
    is_admissible,
    pullback_weight,
)
from .errors import ScenarioError
from .group import GroupData, build_group
from .intlin import IntMatrix
from .monomial import as_points, eval_F, eval_Phi, fiber, jacobian_det
from .quadrature import tanh_sinh_rule

__all__ = [
    "DecompositionScenario",
    "ResidualReport",
    "decomposition_residual",
    "diagonal_residual",
    "corollary_inequality",
    "bell_fiber_residual",
    "MonomialBallEstimate",
    "monomial_ball_estimate",
    "monomial_ball_model",
    "monomial_ball_direct",
]


@dataclass
class DecompositionScenario:
    """A monomial map ``Φ_A: D1 → D2`` with weights and character representatives.

    In axes-deleted mode both domains are used with their coordinate
    hyperplanes removed; in full-domain mode they are used as given and the
    weights must be admissible.
    """

    A: IntMatrix
    D1: ReinhardtDomain
    D2: ReinhardtDomain
    omega2: WeightSpec
    omega1: WeightSpec | None = None
    b_choices: Mapping[tuple[int, ...], Sequence[int]] | None = None
    use_full_domains: bool = False
    kernel_tol: float = 1e-12
    max_degree: int = 200
    validity: Validity = field(default_factory=Validity)
    name: str = "scenario"
    group: GroupData = field(init=False, repr=False)
    _kernels: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if self.A.n != self.D1.n or self.D1.n != self.D2.n:
            raise ScenarioError("matrix and domain dimensions differ")
        self.D1 = self.D1.with_axes_deleted(not self.use_full_domains)
        self.D2 = self.D2.with_axes_deleted(not self.use_full_domains)
        expected = pullback_weight(self.omega2, self.A)
        if self.omega1 is None:
            self.omega1 = expected
        elif self.omega1 != expected:
            raise ScenarioError("omega1 must be the pullback of omega2 (exponent mu·A, same scale)")
        self.group = build_group(self.A)
        chosen = dict(self.b_choices or {})
        table = {}
        for chi in self.group.reps_GAt:
            b = tuple(int(x) for x in chosen.pop(chi.m, admissible_representative(chi, self.A, self.omega2, self.D2)))
            if not self.group.equivalent(chi, self.group.character(b)):
                raise ScenarioError(f"b={b} does not represent the character {chi.m}")
            table[chi.m] = b
        if chosen:
            raise ScenarioError(f"unknown character keys {sorted(chosen)}")
        self.b_choices = table
        if self.use_full_domains:
            if not is_admissible(self.omega1, self.D1):
                raise ScenarioError("omega1 is not admissible on D1")
            for chi, b in table.items():
                if not is_admissible(self.eta(b), self.D2):
                    raise ScenarioError(f"eta_b for b={b} is not admissible on D2")

    def eta(self, b: Sequence[int]) -> WeightSpec:
        return eta_weight(b, self.A, self.omega2)

    # -- mapping checks ----------------------------------------------------
    def check_mapping(self, samples: int = 500, seed: int = 0, scale: float = 0.7) -> dict:
        """Sampled evidence for ``Φ_A(D1) = D2``: forward images and whole fibers."""
        rng = np.random.default_rng(seed)
        z = self.D1.sample(rng, samples, scale=scale)
        forward = np.asarray(self.D2.contains(eval_Phi(self.A, z)))
        w = self.D2.sample(rng, samples, scale=scale)
        back = np.asarray(self.D1.contains(fiber(self.A, self.group, w)))
        report = {
            "samples": samples,
            "forward_fraction": float(np.mean(forward)),
            "fiber_fraction": float(np.mean(back)),
        }
        report["ok"] = report["forward_fraction"] == 1.0 and report["fiber_fraction"] == 1.0
        return report

    def validate(self, samples: int = 500, seed: int = 0) -> None:
        report = self.check_mapping(samples, seed)
        if not report["ok"]:
            raise ScenarioError(
                f"monomial map does not carry D1 onto D2 on samples: forward {report['forward_fraction']:.3f}, "
                f"fibers {report['fiber_fraction']:.3f}"
            )

    # -- kernels -----------------------------------------------------------
    def _build(self, key, D, w):
        if key not in self._kernels:
            self._kernels[key] = build_kernel(D, w, tol=self.kernel_tol, max_degree=self.max_degree,
                                              validity=self.validity)
        return self._kernels[key]

    def kernel1(self) -> KernelSeries:
        return self._build("D1", self.D1, self.omega1)

    def kernel1_full(self) -> KernelSeries:
        return self._build("D1-full", self.D1.with_axes_deleted(False), self.omega1)

    def kernel2(self, chi: tuple[int, ...]) -> KernelSeries:
        b = self.b_choices[chi]
        return self._build(("D2", b), self.D2, self.eta(b))

    def build_all(self, workers: int | None = None) -> None:
        """Build the D1 kernel and every per-character D2 kernel, in parallel."""
        jobs = [("D1", self.D1, self.omega1)] + [
            (("D2", b), self.D2, self.eta(b)) for b in self.b_choices.values()
        ]
        todo = [j for j in jobs if j[0] not in self._kernels]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            built = list(pool.map(
                lambda j: build_kernel(j[1], j[2], tol=self.kernel_tol, max_degree=self.max_degree,
                                       validity=self.validity),
                todo,
            ))
        for (key, _, _), series in zip(todo, built):
            self._kernels[key] = series

    def truncation(self) -> dict:
        return {str(k): v.truncation() for k, v in self._kernels.items()}

    def sample_points(self, count: int, seed: int, scale: float = 0.7) -> np.ndarray:
        return self.D1.sample(np.random.default_rng(seed), count, scale=scale)


@dataclass
class ResidualReport:
    """Both sides of a kernel identity at a batch of points."""

    lhs: np.ndarray
    rhs: np.ndarray
    terms: dict[tuple[int, ...], np.ndarray]
    residual: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual)) if self.residual.size else 0.0

    def rows(self, z, w=None) -> list[dict]:
        """One record per point, for CSV output."""
        z = as_points(z)
        w = z if w is None else as_points(w)
        out = []
        for i in range(len(self.residual)):
            row = {"z": _fmt_point(z[i]), "w": _fmt_point(w[i]),
                   "lhs": complex(self.lhs[i]), "rhs": complex(self.rhs[i])}
            for chi, vals in self.terms.items():
                row["term" + "_".join(str(x) for x in chi)] = complex(vals[i])
            row["residual"] = float(self.residual[i])
            out.append(row)
        return out


def _fmt_point(p) -> str:
    return " ".join(f"{complex(x).real:.17g}{complex(x).imag:+.17g}j" for x in p)


def _batch(z, n) -> np.ndarray:
    return as_points(z, n).reshape(-1, n)


def decomposition_residual(S: DecompositionScenario, z, w) -> ResidualReport:
    """Relative residual of the kernel splitting at point pairs ``(z, w)``."""
    n = S.A.n
    z, w = _batch(z, n), _batch(w, n)
    lhs = np.atleast_1d(kernel_eval(S.kernel1(), z, w))
    Pz, Pw = eval_Phi(S.A, z), eval_Phi(S.A, w)
    terms = {}
    for chi, b in S.b_choices.items():
        neg = tuple(-x for x in b)
        inner = np.atleast_1d(kernel_eval(S.kernel2(chi), Pz, Pw))
        terms[chi] = np.atleast_1d(eval_F(neg, z)) * inner * np.conj(np.atleast_1d(eval_F(neg, w)))
    rhs = sum(terms.values())
    residual = np.abs(lhs - rhs) / np.abs(lhs)
    return ResidualReport(lhs, rhs, terms, residual)


def diagonal_residual(S: DecompositionScenario, z) -> ResidualReport:
    """The splitting on the diagonal; every character term is real and non-negative."""
    rep = decomposition_residual(S, z, z)
    rep.lhs = np.real(rep.lhs)
    rep.rhs = np.real(rep.rhs)
    rep.terms = {k: np.real(v) for k, v in rep.terms.items()}
    return rep


@dataclass
class InequalityReport:
    full: np.ndarray
    split: np.ndarray
    slack: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.slack >= -1e-12 * np.abs(self.full)))

    @property
    def min_relative_slack(self) -> float:
        return float(np.min(self.slack / np.abs(self.full)))


def corollary_inequality(S: DecompositionScenario, z) -> InequalityReport:
    """``B_{D1}(z, z; ω₁) ≤ Σ_χ |F_{−b}(z)|²·B_{D2*}(Φz, Φz; η_b)``.

    The left side is the kernel of D1 with its axes restored; the scenario
    must be in axes-deleted mode. Returns the slack ``right − left``.
    """
    if S.use_full_domains:
        raise ScenarioError("the inequality compares the full D1 against the axes-deleted splitting")
    n = S.A.n
    z = _batch(z, n)
    full = np.atleast_1d(kernel_diag(S.kernel1_full(), z))
    split = np.real(diagonal_residual(S, z).rhs)
    return InequalityReport(full, split, split - full)


def bell_fiber_residual(A: IntMatrix, G: GroupData | None, D2kernel: KernelSeries, D1kernel: KernelSeries,
                        z, v) -> np.ndarray:
    """Transformation law over fibers, as a relative residual per point pair.

    ``Σ_i B₁(z, Ψ_i v)·conj(1/JΦ(Ψ_i v))`` against ``JΦ(z)·B₂(Φz, v)``, where
    the ``Ψ_i v`` run over the fiber of ``v``.
    """
    G = G or build_group(A)
    n = A.n
    z, v = _batch(z, n), _batch(v, n)
    pre = fiber(A, G, v)  # (P, order, n)
    P, m = pre.shape[0], pre.shape[1]
    zz = np.repeat(z[:, None, :], m, axis=1)
    vals = np.asarray(kernel_eval(D1kernel, zz, pre)).reshape(P, m)
    jac = np.asarray(jacobian_det(A, pre)).reshape(P, m)
    left = np.sum(vals * np.conj(1.0 / jac), axis=1)
    right = np.atleast_1d(jacobian_det(A, z)) * np.atleast_1d(kernel_eval(D2kernel, eval_Phi(A, z), v))
    return np.abs(left - right) / np.abs(right)


# -- monomial ball probe ----------------------------------------------------

@dataclass
class MonomialBallEstimate:
    delta: tuple[float, float, float]
    computed: float
    model: float
    reference: float
    laurent_terms: int
    basis_size: int

    @property
    def ratio(self) -> float:
        return self.computed / self.reference

    @property
    def model_ratio(self) -> float:
        return self.model / self.reference

    def to_dict(self) -> dict:
        return {
            "delta": list(self.delta),
            "computed": self.computed,
            "model": self.model,
            "reference": self.reference,
            "ratio": self.ratio,
            "model_ratio": self.model_ratio,
            "laurent_terms": self.laurent_terms,
            "basis_size": self.basis_size,
        }


def _check_delta(delta) -> tuple[float, float, float]:
    d1, d2, d3 = (float(x) for x in delta)
    if not (d1 > 1.5 and d2 > 1.5 and 0 < d3 < 0.5):
        raise ValueError("monomial ball parameters need delta1, delta2 > 3/2 and 0 < delta3 < 1/2")
    return d1, d2, d3


def _annulus_shell(k: int, mu: float, inner: np.ndarray, outer: float) -> np.ndarray:
    """``2π ∫_inner^outer r^{2k+2μ+1} dr``, elementwise in ``inner``."""
    e = 2 * k + 2 * mu + 2
    if e == 0:
        return 2 * math.pi * np.log(outer / inner)
    return 2 * math.pi * (outer**e - inner**e) / e


def _annulus_diagonal_at_one(r_in: float, r_out: float, tol: float) -> tuple[float, int]:
    total, count = 0.0, 0
    for sign in (1, -1):
        k = 0 if sign == 1 else -1
        while True:
            term = 1.0 / float(_annulus_shell(k, 0.0, np.array(r_in), r_out))
            total += term
            count += 1
            if abs(k) > 3 and term < tol * total:
                break
            k += sign
    return total, count


def monomial_ball_model(delta, tol: float = 1e-14) -> float:
    """Kernel at (1, 1) of disk(1, δ₃) × annulus(1/δ₁, δ₂): the product comparison domain."""
    d1, d2, d3 = _check_delta(delta)
    ann, _ = _annulus_diagonal_at_one(1 / d1, d2, tol)
    return ann / (math.pi * d3**2)


def monomial_ball_direct(delta, *, tol: float = 1e-10, max_basis: int = 80, level: int = 2,
                         angular: int = 256, product_model: bool = False) -> tuple[float, int, int]:
    """Kernel at (1, 1) of ``{|z₁| < δ₁, |z₂| < δ₂, |z₁z₂ − 1| < δ₃}``.

    The domain is carried by ``Φ(z) = (z₁z₂, z₂)`` (determinant one, Jacobian
    ``z₂``) onto ``{|w₁ − 1| < δ₃, |w₁|/δ₁ < |w₂| < δ₂}`` with weight ``η``.
    That image is circular in ``w₂``: a Laurent split leaves, for each power
    ``k``, a weighted Bergman problem on the disk around 1, solved with a Gram
    matrix in the basis ``((w₁ − 1)/δ₃)^j``. Returns
    ``(value, laurent_terms, basis_size)``.

    ``product_model=True`` replaces the inner radius ``|w₁|/δ₁`` by ``1/δ₁``
    and drops the weight, which runs the same machinery on the product
    comparison domain.
    """
    d1, d2, d3 = _check_delta(delta)
    A = IntMatrix([[1, 1], [0, 1]])
    eta = WeightSpec.unit(2) if product_model else eta_weight((0, 0), A, WeightSpec.unit(2))
    mu1, mu2 = float(eta.mu[0]), float(eta.mu[1])
    scale = float(eta.scale)

    x, xc, wx = tanh_sinh_rule(level)
    rho, wr = x, wx * x  # polar measure ρ dρ on the unit disk around 1
    theta = 2 * math.pi * np.arange(angular) / angular
    P = 1.0 + d3 * rho[:, None] * np.exp(1j * theta)[None, :]
    absP = np.abs(P)
    base = scale * absP ** (2 * mu1) * d3**2 * (2 * math.pi / angular) * wr[:, None]

    def center_value(k: int, size: int) -> float:
        inner = np.full_like(absP, 1 / d1) if product_model else absP / d1
        weight = base * _annulus_shell(k, mu2, inner, d2)
        j = np.arange(size)
        # e_j = ρ^j e^{ijθ}; Gram entries by the tensor rule
        E = rho[None, :, None] ** j[:, None, None] * np.exp(1j * j[:, None, None] * theta[None, None, :])
        G = np.einsum("iab,jab,ab->ij", E, np.conj(E), weight)
        dscale = 1.0 / np.sqrt(np.real(np.diag(G)))
        Gs = G * dscale[:, None] * dscale[None, :]
        e0 = np.zeros(size)
        e0[0] = 1.0
        return float(np.real(np.linalg.solve(Gs, e0)[0])) * dscale[0] ** 2

    def converged_center(k: int) -> tuple[float, int]:
        size = 8
        prev = center_value(k, size)
        while size < max_basis:
            size += 8
            cur = center_value(k, size)
            if abs(cur - prev) <= tol * abs(cur):
                return cur, size
            prev = cur
        return prev, size

    total, terms, basis = 0.0, 0, 0
    for sign in (1, -1):
        k = 0 if sign == 1 else -1
        while True:
            val, size = converged_center(k)
            total += val
            terms += 1
            basis = max(basis, size)
            if abs(k) > 3 and val < tol * total:
                break
            k += sign
    # |JΦ(1, 1)|² = 1 and F_{-b} = 1 for b = 0
    return total, terms, basis


def monomial_ball_estimate(delta, **kwargs) -> MonomialBallEstimate:
    """Direct kernel, product model and ``δ₃⁻¹·log(δ₁δ₂)`` at the point (1, 1)."""
    d1, d2, d3 = _check_delta(delta)
    value, terms, basis = monomial_ball_direct((d1, d2, d3), **kwargs)
    return MonomialBallEstimate((d1, d2, d3), value, monomial_ball_model((d1, d2, d3)),
                                math.log(d1 * d2) / d3, terms, basis)
