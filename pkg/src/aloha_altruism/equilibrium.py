"""Nash equilibria of the altruistic ALOHA game.

Symmetric equilibria ``q * 1`` of identical players are the roots of a scalar
condition obtained by normalizing the own-strategy gradient at a symmetric
profile. For the log variants the gradient there equals ``-(M/q) f(q)``; for
the proportional variant it equals ``M f(q)``.

Heterogeneous equilibria come from damped simultaneous best-response play.
"""
from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import optimize

from . import game_model as gm
from .errors import DomainError, NoRoot, NotConverged
from .game_model import EPS, GameSpec, UtilityVariant
from .stability import Stability, stability_report

log = logging.getLogger(__name__)

DEFAULT_SCAN_POINTS = 10_000
ROOT_XTOL = 1e-14
ROOT_FTOL = 1e-8
RESIDUAL_TOL = 1e-8
DEDUP_TOL = 1e-6


class NepKind(str, enum.Enum):
    SYMMETRIC = "Symmetric"
    HETEROGENEOUS = "Heterogeneous"


@dataclass(frozen=True)
class SymmetricCondition:
    """Scalar first-order condition for a symmetric equilibrium of identical players."""

    variant: UtilityVariant
    N: int
    a: float
    c: float

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if not self.c > 0:
            raise ValueError("c must be > 0")
        if not self.a >= 0:
            raise ValueError("a must be >= 0")

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        N, a, c = self.N, self.a, self.c
        v = self.variant
        alpha = (1 - q) ** (N - 1)
        S = q * (1 - q) ** (N - 2)
        weight = 1.0 if v.static else alpha
        if v.uses_log:
            cost = alpha if v.throughput_cost else 1.0
            return a * q * weight * S + q * cost - c
        return c * alpha - a * weight * S - 1.0

    def game(self, M: float = 1.0, rates: Sequence[float] | None = None) -> GameSpec:
        return GameSpec.identical(self.N, self.c, self.a, self.variant, M=M, rates=rates)


def symmetric_condition_eval(cond: SymmetricCondition, q: float) -> float:
    return float(cond(q))


@dataclass
class NepResult:
    q_star: np.ndarray
    residual: float
    kind: NepKind
    throughput: np.ndarray
    utility: np.ndarray  # V*/M per player
    stability: Stability
    iterations: Optional[int] = None
    eigen_max_real: float = float("nan")

    @classmethod
    def at(cls, spec: GameSpec, q, kind: NepKind, iterations=None) -> "NepResult":
        """Build a result by recomputing every observable from ``q``."""
        q = gm.as_profile(q, spec.N)
        report = stability_report(spec, q)
        return cls(
            q_star=q,
            residual=kkt_residual(spec, q),
            kind=kind,
            throughput=gm.throughputs(q),
            utility=gm.net_utilities(spec, q) / spec.M,
            stability=report.classification,
            iterations=iterations,
            eigen_max_real=report.jacobian_eigen_max_real,
        )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "q_star": self.q_star.tolist(),
            "residual": self.residual,
            "throughput": self.throughput.tolist(),
            "utility_over_M": self.utility.tolist(),
            "stability": self.stability.value,
            "jacobian_eigen_max_real": self.eigen_max_real,
            "iterations": self.iterations,
        }


def kkt_residual(spec: GameSpec, q) -> float:
    """Largest first-order violation over players.

    Interior players contribute ``|dV_i/dq_i|``. A player sitting at a bound
    only violates optimality if the gradient points back into the interior.
    """
    q = np.asarray(q, dtype=float)
    g = gm.gradients(spec, q)
    lower = q <= EPS
    upper = q >= 1 - EPS
    viol = np.abs(g)
    viol = np.where(lower, np.maximum(g, 0.0), viol)
    viol = np.where(upper, np.maximum(-g, 0.0), viol)
    return float(np.max(viol))


# -- symmetric equilibria -------------------------------------------------


@dataclass(frozen=True)
class ExistenceReport:
    guaranteed_existence: bool
    parity_even_expected: bool
    max_value: float
    argmax: float
    min_value: float
    argmin: float
    value_at_0: float
    value_at_1: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _refine_extremum(cond, x, y, k, sign):
    lo = x[max(k - 1, 0)]
    hi = x[min(k + 1, len(x) - 1)]
    res = optimize.minimize_scalar(lambda t: -sign * float(cond(t)), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-14})
    if res.success and sign * -res.fun > sign * y[k]:
        return float(res.x), float(-res.fun) * sign
    return float(x[k]), float(y[k])


def symmetric_existence_report(cond: SymmetricCondition, scan_points: int = DEFAULT_SCAN_POINTS,
                               tangent_tol: float = 1e-12) -> ExistenceReport:
    """Existence and parity of interior roots of the symmetric condition.

    A strict sign change between ``q = 0`` and ``q = 1`` guarantees a root by
    the intermediate value theorem. When both ends share a sign, a root exists
    iff the interior extremum reaches zero, and crossing strictly gives an even
    number of roots; a tangential touch is reported with odd parity.
    """
    x = np.linspace(EPS, 1 - EPS, scan_points)
    y = cond(x)
    kmax, kmin = int(np.argmax(y)), int(np.argmin(y))
    argmax, vmax = _refine_extremum(cond, x, y, kmax, +1)
    argmin, vmin = _refine_extremum(cond, x, y, kmin, -1)
    f0, f1 = float(cond(0.0)), float(cond(1.0))

    if f0 * f1 < 0:
        exists, even = True, False
    elif f0 < 0 and f1 < 0:
        exists = vmax >= -tangent_tol
        even = vmax > tangent_tol
    elif f0 > 0 and f1 > 0:
        exists = vmin <= tangent_tol
        even = vmin < -tangent_tol
    else:
        exists, even = False, False
    return ExistenceReport(bool(exists), bool(even), vmax, argmax, vmin, argmin, f0, f1)


def symmetric_roots(cond: SymmetricCondition, scan_points: int = DEFAULT_SCAN_POINTS,
                    tangent_tol: float = 1e-12) -> list[float]:
    """All roots of ``cond`` on ``(EPS, 1 - EPS)`` located by a uniform scan.

    Every sign change between neighbouring grid points is refined by
    bisection; grid points where the condition vanishes exactly and
    tangential touches of zero at a local extremum are also reported.
    """
    if scan_points < 100:
        raise ValueError("scan_points must be >= 100")
    x = np.linspace(EPS, 1 - EPS, scan_points)
    y = cond(x)
    roots = []
    for k in range(scan_points - 1):
        if y[k] == 0.0:
            roots.append(float(x[k]))
        elif y[k] * y[k + 1] < 0:
            roots.append(float(optimize.bisect(cond, x[k], x[k + 1], xtol=ROOT_XTOL,
                                               rtol=4 * np.finfo(float).eps, maxiter=200)))
    if y[-1] == 0.0:
        roots.append(float(x[-1]))

    # tangential roots produce no sign change
    mid, left, right = y[1:-1], y[:-2], y[2:]
    near = np.abs(mid) < 1e-4
    peaks = (mid >= left) & (mid >= right) & (mid < 0)
    troughs = (mid <= left) & (mid <= right) & (mid > 0)
    for k in np.flatnonzero(near & (peaks | troughs)) + 1:
        t, v = _refine_extremum(cond, x, y, k, +1 if y[k] < 0 else -1)
        if abs(v) <= tangent_tol and all(abs(t - r) > 1e-9 for r in roots):
            roots.append(t)
    roots.sort()
    for r in roots:
        if abs(cond(r)) >= ROOT_FTOL:
            raise AssertionError(f"root refinement failed at q={r}: {cond(r)}")
    return roots


def find_symmetric_neps(cond: SymmetricCondition, scan_points: int = DEFAULT_SCAN_POINTS,
                        M: float = 1.0, rates: Sequence[float] | None = None) -> list[NepResult]:
    """Symmetric equilibria ``q * 1`` sorted by ``q``.

    Raises :class:`NoRoot` when the scan finds no root.
    """
    roots = symmetric_roots(cond, scan_points)
    if not roots:
        raise NoRoot(f"no symmetric equilibrium for {cond}", report=symmetric_existence_report(cond))
    spec = cond.game(M=M, rates=rates)
    return [NepResult.at(spec, np.full(cond.N, r), NepKind.SYMMETRIC) for r in roots]


# -- best response and heterogeneous equilibria ---------------------------


def _best_responses(spec: GameSpec, q: np.ndarray) -> np.ndarray:
    v = spec.variant
    alpha, S = gm._alpha_and_S(q)
    altruism = spec.A * S if v.static else spec.A * alpha * S
    if v.uses_log:
        cost = spec.M * alpha if v.throughput_cost else spec.M
        den = cost + altruism
        if np.any(den <= 0):
            raise DomainError("best response undefined: zero altruism factor under throughput cost")
        return gm.clamp(spec.C / den)
    slope = spec.C * alpha - altruism - spec.M
    return np.where(slope > 0, 1.0, np.where(slope < 0, 0.0, q))


def best_response(spec: GameSpec, q, i: int) -> float:
    """Maximizer of player ``i``'s net utility against the others in ``q``.

    The log variants have the closed form ``C_i / (cost_i + altruism_i)``,
    clamped to ``[EPS, 1 - EPS]``. The proportional variant is linear in
    ``q_i`` so the maximizer is 0 or 1 (unchanged when the slope is zero).
    """
    q = gm.as_profile(q, spec.N)
    i = gm._check_index(q, i)
    v = spec.variant
    alpha, S = gm._alpha_and_S(q)
    altruism = spec.A[i] * S[i] * (1.0 if v.static else alpha[i])
    if v.uses_log:
        cost = spec.M[i] * alpha[i] if v.throughput_cost else spec.M[i]
        den = cost + altruism
        if den <= 0:
            raise DomainError(f"best response of player {i} undefined: altruism factor is 0")
        return float(gm.clamp(spec.C[i] / den))
    slope = spec.C[i] * alpha[i] - altruism - spec.M[i]
    if slope > 0:
        return 1.0
    if slope < 0:
        return 0.0
    return float(q[i])


def solve_heterogeneous_nep(spec: GameSpec, q0=None, damping: float = 0.5, max_iters: int = 10_000,
                            tol: float = 1e-10) -> NepResult:
    """Damped simultaneous best-response iteration.

    ``q <- (1 - damping) q + damping * BR(q)`` until the largest change drops
    below ``tol``. Raises :class:`NotConverged` (carrying the last iterate)
    when the budget runs out or the fixed point fails the optimality checks.
    """
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    if q0 is None:
        q0 = gm.clamp(spec.C / spec.M)
    q = gm.as_profile(q0, spec.N).copy()
    change = np.inf
    for it in range(1, max_iters + 1):
        nxt = (1 - damping) * q + damping * _best_responses(spec, q)
        change = float(np.max(np.abs(nxt - q)))
        q = nxt
        if change < tol:
            break
    else:
        raise NotConverged(f"best-response iteration did not settle in {max_iters} steps",
                           last=q, change=change, iterations=max_iters)

    residual = kkt_residual(spec, q)
    if residual >= RESIDUAL_TOL:
        raise NotConverged(f"fixed point has residual {residual:.3g}", last=q, change=change,
                           iterations=it)
    if spec.variant.uses_log:
        # own second derivative is -C_i/q_i^2 for both log variants
        if np.any(-spec.C / q**2 >= 0):
            raise NotConverged("second-order condition fails", last=q, iterations=it)
    return NepResult.at(spec, q, NepKind.HETEROGENEOUS, iterations=it)


def find_heterogeneous_neps(spec: GameSpec, starts: Iterable[float] = (0.1, 0.5, 0.9),
                            damping: float = 0.5, max_iters: int = 10_000) -> list[NepResult]:
    """Multi-start search over the grid ``starts ** N``; results deduplicated in L-inf."""
    found: list[NepResult] = []
    starts = tuple(starts)
    for q0 in itertools.product(starts, repeat=spec.N):
        try:
            res = solve_heterogeneous_nep(spec, np.array(q0), damping, max_iters)
        except NotConverged as exc:
            log.debug("start %s did not converge: %s", q0, exc)
            continue
        if all(np.max(np.abs(res.q_star - other.q_star)) > DEDUP_TOL for other in found):
            found.append(res)
    found.sort(key=lambda r: tuple(r.q_star))
    return found
