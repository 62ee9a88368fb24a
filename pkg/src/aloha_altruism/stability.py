"""Local stability of equilibria.

Two tools are provided. Rosen's sufficient condition asks for negative
definiteness of the symmetrized matrix of cross partials ``H``; for identical
players the Gershgorin disc bound turns that into the closed-form test
``C > 2 (N - 1) A``. Linearizing the rate-weighted gradient flow gives the
Jacobian whose spectrum decides stability directly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, HeterogeneousPlayers, NonSymmetric
from .game_model import GameSpec, as_profile, cross_partials

#: Eigenvalues within this band of zero give an inconclusive classification.
CLASSIFICATION_TOL = 1e-9


class Stability(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    INCONCLUSIVE = "Inconclusive"


class Convention(str, enum.Enum):
    # PROOF keeps H_ii = d2V_i/dq_i^2 (= -C/q_i^2 for log utilities);
    # DEFINITION applies the symmetrized sum on the diagonal too, doubling it.
    PROOF = "proof"
    DEFINITION = "definition"


@dataclass(frozen=True)
class StabilityReport:
    rosen_negative_definite: bool
    gershgorin_bound_holds: Optional[bool]
    jacobian_eigen_max_real: float
    classification: Stability

    def to_dict(self) -> dict:
        return {
            "rosen_negative_definite": self.rosen_negative_definite,
            "gershgorin_bound_holds": self.gershgorin_bound_holds,
            "jacobian_eigen_max_real": self.jacobian_eigen_max_real,
            "classification": self.classification.value,
        }


def rosen_matrix(spec: GameSpec, q, convention: Convention | str = Convention.PROOF) -> np.ndarray:
    """Symmetric matrix ``H_ij = d2V_i/dq_i dq_j + d2V_j/dq_j dq_i``.

    With the default ``proof`` convention the diagonal is the single second
    derivative ``d2V_i/dq_i^2`` rather than twice it; this is the form the
    Gershgorin argument bounds by ``-C + 2 (N - 1) A``.
    """
    D = cross_partials(spec, q)
    H = D + D.T
    if Convention(convention) is Convention.PROOF:
        np.fill_diagonal(H, np.diag(D))
    return H


def gershgorin_check(spec: GameSpec) -> bool:
    C, A = spec.C, spec.A
    if np.any(C != C[0]) or np.any(A != A[0]):
        raise HeterogeneousPlayers("the closed-form bound needs identical C and A")
    return bool(C[0] > 2 * (spec.N - 1) * A[0])


def is_negative_definite(H, symmetry_tol: float = 1e-10) -> bool:
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(H - H.T), initial=0.0) > symmetry_tol:
        raise NonSymmetric("matrix is not symmetric")
    return bool(np.all(np.linalg.eigvalsh(H) < 0))


def dynamics_jacobian(spec: GameSpec, q) -> np.ndarray:
    """Jacobian of the flow ``dq_i/dt = r_i dV_i/dq_i``."""
    return spec.r[:, None] * cross_partials(spec, q)


def classify(eigen_max_real: float, tol: float = CLASSIFICATION_TOL) -> Stability:
    if eigen_max_real < -tol:
        return Stability.STABLE
    if eigen_max_real > tol:
        return Stability.UNSTABLE
    return Stability.INCONCLUSIVE


def jacobian_eigen_max_real(spec: GameSpec, q) -> float:
    return float(np.max(np.linalg.eigvals(dynamics_jacobian(spec, q)).real))


def stability_report(spec: GameSpec, q, convention: Convention | str = Convention.PROOF) -> StabilityReport:
    q = as_profile(q, spec.N)
    try:
        gersh = gershgorin_check(spec)
    except HeterogeneousPlayers:
        gersh = None
    try:
        rosen = is_negative_definite(rosen_matrix(spec, q, convention))
        lam = jacobian_eigen_max_real(spec, q)
    except DomainError:
        return StabilityReport(False, gersh, float("nan"), Stability.INCONCLUSIVE)
    return StabilityReport(rosen, gersh, lam, classify(lam))
