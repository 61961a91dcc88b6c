"""The deck group ℤⁿ/𝔠(A) of a monomial map and its character group.

Cosets are enumerated through the Smith normal form ``S·A·T = Λ``: the map
``m ↦ (m·Sᵗ)_j mod λ_j`` identifies ℤⁿ/𝔠(A) with ⊕ ℤ/λ_j. Characters are
indexed by the same construction applied to Aᵗ. All phases are exact
rationals reduced mod 1.
"""

from __future__ import annotations

import cmath
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import DimensionError, GroupTooLargeError
from .intlin import (
    IntMatrix,
    RatMatrix,
    SmithDecomposition,
    in_row_span,
    rational_inverse,
    smith_normal_form,
    vec_mat,
)

__all__ = [
    "DEFAULT_MAX_ORDER",
    "Phase",
    "CosetRep",
    "GroupData",
    "OrthogonalityReport",
    "build_group",
    "iota",
    "xi_phase",
    "xi_phases",
    "character_value",
    "check_orthogonality",
    "exact_root_sum",
]

DEFAULT_MAX_ORDER = 10_000

Parent = Literal["GA", "GAt"]


class Phase:
    """A point ``exp(2πiθ)`` on the unit circle with exact rational θ mod 1.

    Multiplication adds angles, so products of phases never round.
    """

    __slots__ = ("value",)

    def __init__(self, value=0):
        v = Fraction(value)
        self.value = v - math.floor(v)

    def __mul__(self, other: "Phase") -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase(self.value + other.value)

    def __truediv__(self, other: "Phase") -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase(self.value - other.value)

    def __pow__(self, k: int) -> "Phase":
        return Phase(self.value * k)

    def conjugate(self) -> "Phase":
        return Phase(-self.value)

    def __complex__(self) -> complex:
        return cmath.exp(2j * math.pi * float(self.value))

    def __eq__(self, other):
        if isinstance(other, Phase):
            return self.value == other.value
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"Phase({self.value})"

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class CosetRep:
    """An integer vector standing for its class in ℤⁿ/𝔠(A) ("GA") or ℤⁿ/𝔠(Aᵗ) ("GAt").

    Dataclass equality compares vectors; class equality is
    :meth:`GroupData.equivalent`.
    """

    m: tuple[int, ...]
    parent: Parent = "GA"

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(int(x) for x in self.m))
        if self.parent not in ("GA", "GAt"):
            raise ValueError(f"unknown parent {self.parent!r}")


@dataclass(frozen=True)
class _Quotient:
    matrix: IntMatrix  # lattice is generated by the columns of this matrix
    snf: SmithDecomposition
    St_inv: IntMatrix  # (Sᵗ)⁻¹, integral since S is unimodular

    def residues(self, m: Sequence[int]) -> tuple[int, ...]:
        if len(m) != self.matrix.n:
            raise DimensionError(f"vector of length {len(m)} in dimension {self.matrix.n}")
        y = vec_mat(m, self.snf.S.T.rows)
        return tuple(yj % lj for yj, lj in zip(y, self.snf.lam))

    def lift(self, k: Sequence[int]) -> tuple[int, ...]:
        return vec_mat(k, self.St_inv.rows)


def _quotient(M: IntMatrix) -> _Quotient:
    snf = smith_normal_form(M)
    return _Quotient(M, snf, rational_inverse(snf.S.T).to_int())


@dataclass(frozen=True)
class GroupData:
    A: IntMatrix
    order: int
    reps_GA: tuple[CosetRep, ...]
    reps_GAt: tuple[CosetRep, ...]
    Ainv: RatMatrix
    _ga: _Quotient = field(repr=False, compare=False)
    _gat: _Quotient = field(repr=False, compare=False)
    _index_ga: dict = field(repr=False, compare=False)
    _index_gat: dict = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.A.n

    def _q(self, parent: Parent) -> _Quotient:
        return self._ga if parent == "GA" else self._gat

    def residues(self, rep: CosetRep | Sequence[int], parent: Parent | None = None) -> tuple[int, ...]:
        if isinstance(rep, CosetRep):
            return self._q(rep.parent).residues(rep.m)
        return self._q(parent or "GA").residues(rep)

    def equivalent(self, x: CosetRep, y: CosetRep) -> bool:
        if x.parent != y.parent:
            return False
        diff = [a - b for a, b in zip(x.m, y.m)]
        return in_row_span(self.A if x.parent == "GA" else self.A.T, diff)

    def canonical(self, m: CosetRep | Sequence[int], parent: Parent = "GA") -> CosetRep:
        """The enumerated representative of the class of ``m``."""
        if isinstance(m, CosetRep):
            parent, m = m.parent, m.m
        index = self._index_ga if parent == "GA" else self._index_gat
        reps = self.reps_GA if parent == "GA" else self.reps_GAt
        return reps[index[self._q(parent).residues(m)]]

    def index_of(self, rep: CosetRep) -> int:
        index = self._index_ga if rep.parent == "GA" else self._index_gat
        return index[self.residues(rep)]

    def character(self, b: Sequence[int]) -> CosetRep:
        return CosetRep(tuple(b), "GAt")

    def element(self, m: Sequence[int]) -> CosetRep:
        return CosetRep(tuple(m), "GA")


def build_group(A: IntMatrix, max_order: int = DEFAULT_MAX_ORDER) -> GroupData:
    """Enumerate canonical coset representatives of ℤⁿ/𝔠(A) and ℤⁿ/𝔠(Aᵗ).

    Representatives are ``k·(Sᵗ)⁻¹`` for residue tuples ``k`` in
    lexicographic order.
    """
    order = abs(A.det())
    if order > max_order:
        raise GroupTooLargeError(f"group too large: |det A| = {order} exceeds cap {max_order}")
    ga = _quotient(A)
    gat = _quotient(A.T)

    def enumerate_reps(q: _Quotient, parent: Parent):
        reps, index = [], {}
        for i, k in enumerate(itertools.product(*(range(l) for l in q.snf.lam))):
            reps.append(CosetRep(q.lift(k), parent))
            index[tuple(k)] = i
        return tuple(reps), index

    reps_ga, idx_ga = enumerate_reps(ga, "GA")
    reps_gat, idx_gat = enumerate_reps(gat, "GAt")
    return GroupData(A, order, reps_ga, reps_gat, rational_inverse(A), ga, gat, idx_ga, idx_gat)


def iota(G: GroupData, m: CosetRep | Sequence[int]) -> tuple[int, ...]:
    """Residue tuple of ``m`` in ⊕ ℤ/λ_j; equal tuples mean equal cosets."""
    if isinstance(m, CosetRep):
        return G.residues(m)
    return G.residues(m, "GA")


def _vec(m) -> tuple:
    return m.m if isinstance(m, CosetRep) else tuple(m)


def xi_phase(G: GroupData, m: CosetRep | Sequence[int], j: int) -> Phase:
    """Phase of the j-th coordinate multiplier, ``⟨m, e_j·A⁻¹⟩`` mod 1 (j is 0-based)."""
    if not 0 <= j < G.n:
        raise IndexError(f"coordinate index {j} out of range for n={G.n}")
    v = _vec(m)
    return Phase(sum(Fraction(x) * a for x, a in zip(v, G.Ainv.row(j))))


def xi_phases(G: GroupData, m: CosetRep | Sequence[int]) -> tuple[Phase, ...]:
    return tuple(xi_phase(G, m, j) for j in range(G.n))


def character_value(G: GroupData, b: CosetRep | Sequence[int], m: CosetRep | Sequence[int]) -> Phase:
    """``χ_b([m]) = exp(2πi⟨m, b·A⁻¹⟩)`` as an exact phase."""
    bv, mv = _vec(b), _vec(m)
    if len(bv) != G.n or len(mv) != G.n:
        raise DimensionError("vector length does not match the group dimension")
    row = vec_mat([Fraction(x) for x in bv], G.Ainv.rows)
    return Phase(sum(x * y for x, y in zip(mv, row)))


def exact_root_sum(phases: Iterable[Phase]) -> int | None:
    """Exact value of Σ exp(2πiθ) when the multiset is a uniform cover of a cyclic group.

    The values of a character on a finite abelian group are the d-th roots of
    unity, each hit equally often. Such a sum is the count when d = 1 and
    exactly 0 otherwise. Returns None if the multiset has another shape.
    """
    counts = Counter(p.value for p in phases)
    d = len(counts)
    if d == 0:
        return 0
    expected = {Fraction(j, d) for j in range(d)}
    if set(counts) != expected or len(set(counts.values())) != 1:
        return None
    total = sum(counts.values())
    return total if d == 1 else 0


@dataclass(frozen=True)
class OrthogonalityReport:
    passed: bool
    exact: bool
    max_deviation: float
    pairs_checked: int

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "exact": self.exact,
            "max_deviation": self.max_deviation,
            "pairs_checked": self.pairs_checked,
        }


def _residue_table(G: GroupData) -> tuple[np.ndarray, int]:
    """Character table as integers ``r`` with ``χ_b([m]) = exp(2πi r/e)``."""
    e = math.lcm(*(x.denominator for row in G.Ainv.rows for x in row))
    scaled = [[int(x * e) for x in vec_mat([Fraction(v) for v in b.m], G.Ainv.rows)] for b in G.reps_GAt]
    elements = [list(m.m) for m in G.reps_GA]
    table = np.array(scaled, dtype=np.int64) @ np.array(elements, dtype=np.int64).T
    return table % e, e


def _exact_residue_sum(residues: np.ndarray, e: int) -> int | None:
    """:func:`exact_root_sum` for phases given as residues mod ``e``."""
    counts = np.bincount(residues, minlength=e)
    hit = np.flatnonzero(counts)
    d = len(hit)
    if d == 0:
        return 0
    if e % d or not np.array_equal(hit, np.arange(d) * (e // d)) or np.any(counts[hit] != counts[hit[0]]):
        return None
    return int(counts.sum()) if d == 1 else 0


def check_orthogonality(G: GroupData) -> OrthogonalityReport:
    """Row and column orthogonality of the character table, exactly and in floating point."""
    table, e = _residue_table(G)
    roots = np.exp(2j * np.pi * np.arange(e) / e)
    exact_ok = True
    max_dev = 0.0
    pairs = 0
    for i in range(G.order):
        for k in range(G.order):
            prods = (table[i] - table[k]) % e
            target = G.order if i == k else 0
            exact_ok &= _exact_residue_sum(prods, e) == target
            max_dev = max(max_dev, abs(roots[prods].sum() - target))
            pairs += 1
    for g in range(G.order):
        column = table[:, g]
        target = G.order if g == 0 else 0
        exact_ok &= _exact_residue_sum(column, e) == target
        max_dev = max(max_dev, abs(roots[column].sum() - target))
    return OrthogonalityReport(bool(exact_ok and max_dev < 1e-9), bool(exact_ok), float(max_dev), pairs)
