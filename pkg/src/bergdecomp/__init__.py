"""Deck groups of monomial maps and weighted Bergman kernel identities on Reinhardt domains."""

from .bergman import KernelSeries, build_kernel, kernel_diag, kernel_eval, monomial_norm
from .domains import (
    Ellipsoid,
    MonomialRegion,
    Validity,
    WeightSpec,
    admissible_representative,
    ball,
    disk,
    eta_weight,
    hartogs_triangle,
    is_admissible,
    polydisk,
    product,
    pullback_weight,
)
from .errors import (
    BergdecompError,
    DomainError,
    GroupTooLargeError,
    QuadratureError,
    ScenarioError,
    SingularMatrixError,
    TruncationError,
    ValidityError,
)
from .group import GroupData, build_group, character_value, check_orthogonality
from .identities import (
    DecompositionScenario,
    bell_fiber_residual,
    corollary_inequality,
    decomposition_residual,
    diagonal_residual,
    monomial_ball_estimate,
)
from .intlin import IntMatrix, RatMatrix, in_row_span, rational_inverse, smith_normal_form
from .monomial import eval_F, eval_Phi, fiber, jacobian_det
from .projection import LaurentPolynomial, project_chi, transport_Tb
from .quadrature import QuadratureSpec

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
