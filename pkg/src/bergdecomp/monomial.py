"""Monomials ``F_b(z) = ∏ z_j^{b_j}``, monomial maps Φ_A and their fibers.

Points are numpy arrays whose last axis has length n, so every function here
also accepts a batch of points of shape ``(..., n)``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError
from .group import CosetRep, GroupData, xi_phases
from .intlin import IntMatrix, RatMatrix, rational_inverse

__all__ = [
    "as_points",
    "is_off_axes",
    "int_pow",
    "eval_F",
    "eval_F_real",
    "eval_Phi",
    "jacobian_det",
    "polar",
    "from_polar",
    "principal_preimage",
    "fiber",
    "action_apply",
]


def as_points(z, n: int | None = None) -> np.ndarray:
    arr = np.asarray(z, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if n is not None and arr.shape[-1] != n:
        raise DimensionError(f"expected points with {n} coordinates, got shape {arr.shape}")
    return arr


def is_off_axes(z) -> np.ndarray | bool:
    """True where every coordinate is non-zero."""
    return np.all(as_points(z) != 0, axis=-1)


def _is_integer(x) -> bool:
    if isinstance(x, Integral):
        return True
    if isinstance(x, Fraction):
        return x.denominator == 1
    return float(x).is_integer()


def int_pow(x: np.ndarray, k: int) -> np.ndarray:
    """``x**k`` by binary exponentiation; negative k inverts the result."""
    k = int(k)
    result = np.ones_like(x)
    base = x
    e = abs(k)
    while e:
        if e & 1:
            result = result * base
        e >>= 1
        if e:
            base = base * base
    if k < 0:
        if np.any(x == 0):
            raise DomainError("negative power of a zero coordinate")
        result = 1.0 / result
    return result


def eval_F(b: Sequence, z) -> np.ndarray | complex:
    """Evaluate the monomial ``F_b`` at ``z``.

    Integer exponents work for any complex input (negative ones need non-zero
    coordinates). Non-integer exponents are only defined here for positive
    real coordinates.
    """
    z = as_points(z)
    if len(b) != z.shape[-1]:
        raise DimensionError(f"exponent of length {len(b)} for points of dimension {z.shape[-1]}")
    out = np.ones(z.shape[:-1], dtype=complex)
    for j, bj in enumerate(b):
        col = z[..., j]
        if _is_integer(bj):
            out = out * int_pow(col, int(bj))
        else:
            if np.any(col.imag != 0) or np.any(col.real <= 0):
                raise DomainError("non-integer exponent requires positive real coordinates")
            out = out * np.exp(float(bj) * np.log(col.real))
    return out[()] if out.ndim == 0 else out


def eval_F_real(a: Sequence, t) -> np.ndarray:
    """``∏ t_j^{a_j}`` for positive real ``t`` and real exponents, via exp(a·log t)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("real powers need strictly positive inputs")
    logs = np.log(t)
    return np.exp(sum(float(aj) * logs[..., j] for j, aj in enumerate(a)))


def eval_Phi(A: IntMatrix, z) -> np.ndarray:
    """``Φ_A(z)``: component j is the monomial with exponent row j of A."""
    z = as_points(z, A.n)
    return np.stack([eval_F(A.row(j), z) for j in range(A.n)], axis=-1)


def jacobian_det(A: IntMatrix, z) -> np.ndarray | complex:
    """``det(A)·F_{1·A−1}(z)``."""
    z = as_points(z, A.n)
    exps = [sum(A.col(k)) - 1 for k in range(A.n)]
    return A.det() * eval_F(exps, z)


def polar(z) -> tuple[np.ndarray, np.ndarray]:
    """Moduli and angles in turns, ``z = r·exp(2πiθ)`` with θ in [0, 1)."""
    z = as_points(z)
    if np.any(z == 0):
        raise DomainError("polar decomposition needs off-axes points")
    r = np.abs(z)
    theta = np.mod(np.angle(z) / (2 * math.pi), 1.0)
    theta = np.where(theta >= 1.0, 0.0, theta)
    return r, theta


def from_polar(r, theta) -> np.ndarray:
    return np.asarray(r) * np.exp(2j * math.pi * np.asarray(theta))


def _rat_rows_float(M: RatMatrix) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in M.rows])


def principal_preimage(A: IntMatrix, w, Ainv: RatMatrix | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Moduli and angles of ``Φ_{A⁻¹}(ρ)⊗exp(2πi A⁻¹φ)`` for ``w = ρ⊗exp(2πiφ)``."""
    Ainv = Ainv if Ainv is not None else rational_inverse(A)
    rho, phi = polar(as_points(w, A.n))
    M = _rat_rows_float(Ainv)
    r0 = np.exp(np.log(rho) @ M.T)
    theta0 = phi @ M.T
    return r0, theta0


def _phase_vector(G: GroupData, m) -> np.ndarray:
    return np.array([float(p.value) for p in xi_phases(G, m)])


def fiber(A: IntMatrix, G: GroupData, w) -> np.ndarray:
    """All |det A| preimages of ``w`` in canonical coset order.

    Returns shape ``(|det A|, n)`` for a single point or ``(..., |det A|, n)``
    for a batch. Angles are combined exactly before a single exponential.
    """
    w = as_points(w, A.n)
    r0, theta0 = principal_preimage(A, w, G.Ainv)
    shifts = np.stack([_phase_vector(G, m) for m in G.reps_GA])  # (order, n)
    theta = theta0[..., None, :] + shifts
    return r0[..., None, :] * np.exp(2j * math.pi * np.mod(theta, 1.0))


def action_apply(G: GroupData, m: CosetRep | Sequence[int], z) -> np.ndarray:
    """``ξ([m])⊗z``: coordinate j rotated by the j-th deck phase."""
    z = as_points(z, G.n)
    if np.any(z == 0):
        raise DomainError("the group action is defined on off-axes points")
    return z * np.exp(2j * math.pi * _phase_vector(G, m))
