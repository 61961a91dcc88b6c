"""Weighted Bergman kernels of Reinhardt domains as monomial series.

On a Reinhardt domain the monomials are orthogonal for any radial weight,
so ``B(z, w) = Σ_k F_k(z)·conj(F_k(w)) / ‖F_k‖²``. The series is built
shell by shell (``max_j |k_j| = K``) until a geometric-ratio tail estimate
over the validity region falls below the requested tolerance.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
from filelock import FileLock

from .domains import MonomialRegion, ReinhardtDomain, Validity, WeightSpec, domain_from_dict
from .errors import TruncationError, ValidityError
from .monomial import as_points, int_pow
from .quadrature import QuadratureSpec

__all__ = [
    "DEFAULT_MAX_DEGREE",
    "monomial_norm",
    "exact_monomial_norm",
    "KernelSeries",
    "build_kernel",
    "kernel_eval",
    "kernel_diag",
    "cached_build_kernel",
    "kernel_cache_key",
]

DEFAULT_MAX_DEGREE = 200
_EVAL_BLOCK = 1 << 21  # terms × points per evaluation block


def _mu_scaling(w: WeightSpec) -> tuple[int, np.ndarray]:
    """Integer ``d`` and integer vector ``d·2μ`` so that ``d·s`` stays integral."""
    d = 1
    for m in w.mu:
        d = math.lcm(d, (2 * m).denominator)
    return d, np.array([int(2 * m * d) for m in w.mu], dtype=np.int64)


def _log_norms(D: ReinhardtDomain, w: WeightSpec, k: np.ndarray) -> np.ndarray:
    d, two_mu = _mu_scaling(w)
    s_scaled = d * (2 * np.asarray(k, dtype=np.int64) + 2) + two_mu
    log_prefactor = math.log(float(w.scale)) + D.n * math.log(2 * math.pi)
    return log_prefactor + D.log_radial_integral(s_scaled, d)


def monomial_norm(D: ReinhardtDomain, w: WeightSpec, k: Sequence[int],
                  q: QuadratureSpec | None = None, method: str = "closed") -> float:
    """``‖F_k‖²`` in L²(D, ω dV); ``math.inf`` when the monomial is not square integrable.

    ``method="closed"`` uses the analytic radial integral, ``"quadrature"``
    the refined Gauss-Legendre route.
    """
    k = tuple(int(x) for x in k)
    if method == "closed":
        return float(math.exp(_log_norms(D, w, np.array([k]))[0]))
    if method == "quadrature":
        s = [2 * kj + 2 * m + 2 for kj, m in zip(k, w.mu)]
        val = D.quadrature_radial_integral(s, q)
        return float(w.scale) * (2 * math.pi) ** D.n * val
    raise ValueError(f"unknown method {method!r}")


def exact_monomial_norm(D: ReinhardtDomain, w: WeightSpec, k: Sequence[int]) -> Fraction | None:
    """``‖F_k‖² / πⁿ`` as an exact rational when the radial integral is rational."""
    s = [2 * int(kj) + 2 * m + 2 for kj, m in zip(k, w.mu)]
    val = D.exact_radial_integral(s)
    if val is None:
        return None
    return w.scale * 2**D.n * val


def _negative_directions(D: ReinhardtDomain, k: np.ndarray) -> np.ndarray:
    """Per validity coordinate: does some exponent grow toward that coordinate's floor?"""
    if len(k) == 0:
        return np.zeros(D.n, dtype=bool)
    if isinstance(D, MonomialRegion):
        _, sign = D._t(k)
        return np.any(sign < 0, axis=0)
    return np.any(np.asarray(k) < 0, axis=0)


@dataclass
class KernelSeries:
    """Truncated monomial expansion of a weighted Bergman kernel."""

    domain: ReinhardtDomain
    weight: WeightSpec
    exponents: np.ndarray
    coefficients: np.ndarray
    degree: int
    tail_bound: float
    tol: float
    validity: Validity
    diagonal_floor: float
    _exact: dict | None = field(default=None, repr=False)

    @property
    def terms(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(x) for x in k): float(c) for k, c in zip(self.exponents, self.coefficients)}

    def __len__(self):
        return len(self.coefficients)

    def exact_coefficients(self) -> dict[tuple[int, ...], Fraction] | None:
        """Coefficients times πⁿ as exact rationals, or None if any is irrational."""
        if self._exact is None:
            table = {}
            for k in self.exponents:
                key = tuple(int(x) for x in k)
                norm = exact_monomial_norm(self.domain, self.weight, key)
                if norm is None:
                    return None
                table[key] = 1 / norm
            self._exact = table
        return dict(self._exact)

    def truncation(self) -> dict:
        return {
            "degree": self.degree,
            "tail_bound": self.tail_bound,
            "tol": self.tol,
            "diagonal_floor": self.diagonal_floor,
            "terms": len(self),
            "validity": self.validity.to_dict(),
            "validity_region": self.domain.describe_validity(self.validity),
        }

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "domain": self.domain.to_dict(),
            "weight": self.weight.to_dict(),
            "exponents": self.exponents.tolist(),
            "coefficients": [float(c) for c in self.coefficients],
            "truncation": self.truncation(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSeries":
        t = d["truncation"]
        n = len(d["weight"]["mu"])
        return cls(
            domain_from_dict(d["domain"]),
            WeightSpec.from_dict(d["weight"]),
            np.array(d["exponents"], dtype=np.int64).reshape(-1, n),
            np.array(d["coefficients"], dtype=float),
            int(t["degree"]),
            float(t["tail_bound"]),
            float(t["tol"]),
            Validity.from_dict(t["validity"]),
            float(t["diagonal_floor"]),
        )


def _shell(n: int, K: int, nonneg: Sequence[bool]) -> np.ndarray:
    ranges = [range(0 if nn else -K, K + 1) for nn in nonneg]
    pts = np.array(list(itertools.product(*ranges)), dtype=np.int64).reshape(-1, n)
    return pts[np.max(np.abs(pts), axis=1) == K] if K > 0 else pts


def build_kernel(D: ReinhardtDomain, w: WeightSpec, q: QuadratureSpec | None = None, tol: float = 1e-12, *,
                 max_degree: int = DEFAULT_MAX_DEGREE, validity: Validity | None = None,
                 min_degree: int = 3, cross_check: int = 0) -> KernelSeries:
    """Enumerate square-integrable monomials shell by shell until the tail is below ``tol``.

    ``tol`` is relative to a lower bound of the kernel diagonal on the
    validity region. On a domain that meets an axis without deleting it,
    exponents on that axis are restricted to be non-negative (the monomial
    must be holomorphic across the axis). ``cross_check`` recomputes that
    many of the first norms by quadrature and insists on agreement to
    ``q.refinement_tol``.
    """
    if w.n != D.n:
        raise ValueError("weight and domain dimensions differ")
    validity = validity or Validity()
    build_validity = Validity(validity.shrink, validity.floor, None)
    nonneg = D.meeting_axes()

    ks, cs = [], []
    prev_shell = None
    diag_floor = 0.0
    tail = math.inf
    K = 0
    while True:
        if K > max_degree:
            raise TruncationError(
                f"truncation not achieved: tail bound {tail:.3e} above {tol:.1e} at degree {max_degree}"
            )
        shell = _shell(D.n, K, nonneg)
        lognorm = _log_norms(D, w, shell) if len(shell) else np.zeros(0)
        keep = np.isfinite(lognorm)
        shell, lognorm = shell[keep], lognorm[keep]
        coeff = np.exp(-lognorm)
        if len(shell):
            ks.append(shell)
            cs.append(coeff)
            sup = D.log_sup(shell, build_validity)
            inf = D.log_inf(shell, build_validity)
            shell_sum = float(np.sum(np.exp(-lognorm + 2 * sup)))
            diag_floor = max(diag_floor, float(np.max(np.exp(-lognorm + 2 * inf))))
        else:
            shell_sum = 0.0
        if K >= min_degree and prev_shell is not None:
            if shell_sum == 0.0:
                tail = 0.0
            elif prev_shell > 0 and shell_sum < prev_shell:
                rho = shell_sum / prev_shell
                tail = shell_sum * rho / (1 - rho)
            else:
                tail = math.inf
            if diag_floor > 0 and tail <= tol * diag_floor:
                break
        prev_shell = shell_sum
        K += 1

    exps = np.concatenate(ks) if ks else np.zeros((0, D.n), dtype=np.int64)
    coeffs = np.concatenate(cs) if cs else np.zeros(0)
    floored = tuple(bool(x) for x in _negative_directions(D, exps))
    series = KernelSeries(D, w, exps, coeffs, K, tail / diag_floor if diag_floor else math.inf, tol,
                          Validity(validity.shrink, validity.floor, floored), diag_floor)
    if cross_check:
        q = q or QuadratureSpec()
        for k, c in list(zip(exps, coeffs))[:cross_check]:
            quad = monomial_norm(D, w, k, q, method="quadrature")
            if abs(quad * c - 1) > max(q.refinement_tol, 1e-10) * 10:
                raise TruncationError(f"closed-form and quadrature norms disagree at k={tuple(k)}: "
                                      f"{1 / c!r} vs {quad!r}")
    return series


def _check_validity(K: KernelSeries, pts: np.ndarray, label: str):
    ok = K.domain.in_validity(pts, K.validity)
    if not np.all(ok):
        raise ValidityError(
            f"{label} outside the certified region of this kernel: {K.domain.describe_validity(K.validity)}",
            region=K.domain.describe_validity(K.validity),
        )


def kernel_eval(K: KernelSeries, z, w, *, check: bool = True) -> np.ndarray | complex:
    """``Σ_k c_k F_k(z)·conj(F_k(w))``; ``z`` and ``w`` broadcast over leading axes."""
    z = as_points(z, K.domain.n)
    w = as_points(w, K.domain.n)
    if check:
        _check_validity(K, z, "z")
        _check_validity(K, w, "w")
    z, w = np.broadcast_arrays(z, w)
    shape = z.shape[:-1]
    x = (z * np.conj(w)).reshape(-1, K.domain.n)  # (P, n)
    out = np.empty(x.shape[0], dtype=complex)
    step = max(1, _EVAL_BLOCK // max(1, len(K.exponents)))
    for start in range(0, x.shape[0], step):
        out[start:start + step] = _series_at(K, x[start:start + step])
    out = out.reshape(shape)
    return out[()] if out.ndim == 0 else out


def _series_at(K: KernelSeries, x: np.ndarray) -> np.ndarray:
    prod = np.ones((len(K.exponents), x.shape[0]), dtype=complex)
    for j in range(K.domain.n):
        uniq, inv = np.unique(K.exponents[:, j], return_inverse=True)
        table = np.stack([int_pow(x[:, j], int(e)) for e in uniq]) if len(uniq) else np.zeros((0, x.shape[0]))
        prod *= table[inv]
    return K.coefficients @ prod


def kernel_diag(K: KernelSeries, z, *, check: bool = True) -> np.ndarray | float:
    """``B(z, z)``; real and non-negative."""
    val = np.real(kernel_eval(K, z, z, check=check))
    return val[()] if np.ndim(val) == 0 else val


# -- caching --------------------------------------------------------------

def kernel_cache_key(D: ReinhardtDomain, w: WeightSpec, tol: float, max_degree: int, validity: Validity) -> str:
    payload = json.dumps(
        {"domain": D.to_dict(), "weight": w.to_dict(), "tol": tol, "max_degree": max_degree,
         "validity": validity.to_dict()},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


def cached_build_kernel(D: ReinhardtDomain, w: WeightSpec, tol: float = 1e-12, *,
                        max_degree: int = DEFAULT_MAX_DEGREE, validity: Validity | None = None,
                        cache_dir: str | os.PathLike | None = None) -> tuple[KernelSeries, bool]:
    """Build a kernel or load it from a JSON artifact; returns ``(series, from_cache)``.

    A lock file next to the artifact serialises concurrent writers.
    """
    validity = validity or Validity()
    if cache_dir is None:
        return build_kernel(D, w, tol=tol, max_degree=max_degree, validity=validity), False
    cache = Path(cache_dir)
    cache.mkdir(parents=True, exist_ok=True)
    key = kernel_cache_key(D, w, tol, max_degree, validity)
    path = cache / f"kernel-{key}.json"
    with FileLock(str(path) + ".lock"):
        if path.exists():
            with path.open(encoding="utf-8") as fh:
                return KernelSeries.from_dict(json.load(fh)), True
        series = build_kernel(D, w, tol=tol, max_degree=max_degree, validity=validity)
        tmp = path.with_suffix(".tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            json.dump(series.to_dict(), fh)
        tmp.replace(path)
    return series, False
