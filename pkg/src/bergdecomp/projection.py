"""Character projections and the transport operator.

``Π_χ[f](z) = (1/#G)·Σ_m χ([m])·f(ξ([m])⊗z)`` splits a function on a
Reinhardt domain into isotypic pieces. ``T_b`` moves the χ_b-piece down to
the image domain through the principal preimage of the monomial map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .domains import ReinhardtDomain, WeightSpec, eta_weight, pullback_weight
from .group import CosetRep, GroupData, character_value
from .intlin import IntMatrix, vec_mat
from .monomial import action_apply, as_points, eval_F, from_polar, fiber, int_pow, principal_preimage
from .quadrature import QuadratureSpec

__all__ = [
    "LaurentPolynomial",
    "SampledFunction",
    "project_chi",
    "transport_Tb",
    "ProjectionReport",
    "check_projection_algebra",
    "NormIdentityReport",
    "norm_identity_residual",
    "parseval_residual",
]


class LaurentPolynomial:
    """A finite sum ``Σ c_k z^k`` with integer exponents of either sign."""

    def __init__(self, coeffs: Mapping[Sequence[int], complex]):
        terms = {}
        for k, c in coeffs.items():
            k = tuple(int(x) for x in k)
            terms[k] = terms.get(k, 0) + complex(c)
        self.terms = {k: c for k, c in terms.items() if c != 0}
        dims = {len(k) for k in terms}
        if len(dims) > 1:
            raise ValueError("exponents of mixed length")
        self.n = dims.pop() if dims else 0

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, *, low: int = -3, high: int = 3,
               terms: int = 6) -> "LaurentPolynomial":
        exps = rng.integers(low, high + 1, size=(terms, n))
        vals = rng.normal(size=terms) + 1j * rng.normal(size=terms)
        return cls({tuple(k): c for k, c in zip(exps, vals)})

    def __call__(self, z) -> np.ndarray:
        z = as_points(z, self.n)
        out = np.zeros(z.shape[:-1], dtype=complex)
        for k, c in self.terms.items():
            term = np.full(z.shape[:-1], c, dtype=complex)
            for j, kj in enumerate(k):
                term = term * int_pow(z[..., j], kj)
            out = out + term
        return out

    def pullback(self, A: IntMatrix, b: Sequence[int] | None = None) -> "LaurentPolynomial":
        """``(g∘Φ_A)·F_{−b}``, computed on exponents: ``k ↦ k·A − b``."""
        b = tuple(b) if b is not None else (0,) * A.n
        return LaurentPolynomial(
            {tuple(x - y for x, y in zip(vec_mat(k, A.rows), b)): c for k, c in self.terms.items()}
        )

    def __repr__(self):
        return f"LaurentPolynomial({len(self.terms)} terms)"


@dataclass(frozen=True)
class SampledFunction:
    """A black-box function together with the domain it lives on."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    domain: ReinhardtDomain | None = None

    def __call__(self, z):
        return np.asarray(self.evaluator(z))


def _as_function(f) -> Callable:
    return f if callable(f) else SampledFunction(f)


def _char_table(G: GroupData, chi) -> np.ndarray:
    return np.array([complex(character_value(G, chi, m)) for m in G.reps_GA])


def project_chi(G: GroupData, chi: CosetRep | Sequence[int], f, z) -> np.ndarray | complex:
    """``Π_χ[f](z)`` for off-axes ``z``; batches broadcast over leading axes."""
    z = as_points(z, G.n)
    table = _char_table(G, chi)
    total = np.zeros(z.shape[:-1], dtype=complex)
    for c, m in zip(table, G.reps_GA):
        total = total + c * np.asarray(f(action_apply(G, m, z)))
    out = total / G.order
    return out[()] if out.ndim == 0 else out


def _rep_vector(b) -> tuple[int, ...]:
    return tuple(int(x) for x in (b.m if isinstance(b, CosetRep) else b))


def transport_Tb(G: GroupData, b: CosetRep | Sequence[int], f, w, *, fiber_index: int = 0) -> np.ndarray | complex:
    """``T_b[f](w) = Π_{χ_b}[f](z)·F_b(z)`` at a preimage ``z`` of ``w``.

    The principal preimage is used unless ``fiber_index`` picks another
    point of the fiber; all choices agree when the operator is well defined.
    """
    b = _rep_vector(b)
    w = as_points(w, G.n)
    if fiber_index == 0:
        r0, theta0 = principal_preimage(G.A, w, G.Ainv)
        z = from_polar(r0, theta0)
    else:
        z = fiber(G.A, G, w)[..., fiber_index, :]
    out = np.asarray(project_chi(G, b, f, z)) * np.asarray(eval_F(b, z))
    return out[()] if out.ndim == 0 else out


@dataclass
class ProjectionReport:
    completeness: float
    equivariance: float
    idempotence: float
    invariance: float
    points: int

    @property
    def max_deviation(self) -> float:
        return max(self.completeness, self.equivariance, self.idempotence, self.invariance)

    def to_dict(self) -> dict:
        return {
            "completeness": self.completeness,
            "equivariance": self.equivariance,
            "idempotence": self.idempotence,
            "invariance": self.invariance,
            "max_deviation": self.max_deviation,
            "points": self.points,
        }


def check_projection_algebra(G: GroupData, f, points) -> ProjectionReport:
    """Completeness, equivariance, idempotence and ``Π_χ[f]·F_b`` invariance at ``points``.

    Deviations are measured relative to ``max(1, max|f|)``.
    """
    z = as_points(points, G.n)
    f = _as_function(f)
    fz = np.asarray(f(z))
    scale = max(1.0, float(np.max(np.abs(fz))))
    pieces = {b.m: np.asarray(project_chi(G, b, f, z)) for b in G.reps_GAt}

    completeness = float(np.max(np.abs(sum(pieces.values()) - fz))) / scale

    equivariance = invariance = 0.0
    for b in G.reps_GAt:
        Fb = np.asarray(eval_F(b.m, z))
        for h in G.reps_GA:
            hz = action_apply(G, h, z)
            moved = np.asarray(project_chi(G, b, f, hz))
            chi_h = complex(character_value(G, b, h))
            equivariance = max(equivariance, float(np.max(np.abs(moved - pieces[b.m] / chi_h))) / scale)
            # compared after dividing by F_b(z), which is nonzero off the axes
            lhs = moved * np.asarray(eval_F(b.m, hz)) / Fb
            invariance = max(invariance, float(np.max(np.abs(lhs - pieces[b.m]))) / scale)

    idempotence = 0.0
    for b1 in G.reps_GAt:
        for b2 in G.reps_GAt:
            inner = lambda x, b2=b2: project_chi(G, b2, f, x)  # noqa: E731
            twice = np.asarray(project_chi(G, b1, inner, z))
            expected = pieces[b1.m] if b1.m == b2.m else 0.0
            idempotence = max(idempotence, float(np.max(np.abs(twice - expected))) / scale)

    return ProjectionReport(completeness, equivariance, idempotence, invariance, int(np.prod(z.shape[:-1])))


@dataclass
class NormIdentityReport:
    lhs: float
    rhs: float
    residual: float
    eta: WeightSpec
    image_domain: ReinhardtDomain = field(repr=False)

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "residual": self.residual, "eta": self.eta.to_dict()}


def _derive_omega2(omega1: WeightSpec, G: GroupData) -> WeightSpec:
    mu2 = vec_mat(list(omega1.mu), G.Ainv.rows)
    return WeightSpec(tuple(Fraction(x) for x in mu2), omega1.scale)


def norm_identity_residual(G: GroupData, b: CosetRep | Sequence[int], f, omega1: WeightSpec, D1: ReinhardtDomain,
                           quad: QuadratureSpec | None = None, *, omega2: WeightSpec | None = None,
                           D2: ReinhardtDomain | None = None) -> NormIdentityReport:
    """Compare ``∫_{D1} |Π_χ[f]|²ω₁`` with ``∫_{D2} |T_b[f]|²η_b``.

    ``omega2`` defaults to the weight whose pullback is ``omega1``;
    ``D2`` defaults to ``Φ_A(D1)``.
    """
    quad = quad or QuadratureSpec()
    b = _rep_vector(b)
    omega2 = omega2 or _derive_omega2(omega1, G)
    if pullback_weight(omega2, G.A) != omega1:
        raise ValueError("omega1 must equal the pullback of omega2 under the monomial map")
    D2 = D2 or D1.image_under(G.A)
    eta = eta_weight(b, G.A, omega2)
    f = _as_function(f)

    lhs = D1.integrate(lambda z: np.abs(project_chi(G, b, f, z)) ** 2 * omega1(z), quad)
    rhs = D2.integrate(lambda w: np.abs(transport_Tb(G, b, f, w)) ** 2 * eta(w), quad)
    denom = max(abs(lhs), abs(rhs))
    residual = abs(lhs - rhs) / denom if denom > 0 else 0.0
    return NormIdentityReport(float(lhs), float(rhs), residual, eta, D2)


def parseval_residual(G: GroupData, f, D: ReinhardtDomain, omega: WeightSpec | None = None,
                      quad: QuadratureSpec | None = None) -> float:
    """Relative gap between ``‖f‖²`` and ``Σ_χ ‖Π_χ f‖²`` over ``D``."""
    quad = quad or QuadratureSpec()
    omega = omega or WeightSpec.unit(G.n)
    f = _as_function(f)
    total = D.integrate(lambda z: np.abs(f(z)) ** 2 * omega(z), quad)
    # summed under one integral: pieces orthogonal to f vanish and have no relative accuracy
    split = D.integrate(
        lambda z: sum(np.abs(project_chi(G, b, f, z)) ** 2 for b in G.reps_GAt) * omega(z), quad
    )
    return abs(total - split) / abs(total) if total else abs(split)

