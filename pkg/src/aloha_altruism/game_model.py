"""Throughputs, altruism factors and net utilities of the slotted-ALOHA game.

Players choose transmission probabilities ``q``. Player ``i`` succeeds in a
slot with probability ``gamma_i = q_i * prod_{j != i}(1 - q_j)``; the product
over the other players is the dynamic altruism factor ``alpha_i``. Each
player's net utility combines a utility of its own throughput, an altruism
term ``A_i * alpha_i * mean_{j != i} gamma_j`` and a networking cost.

Three variants are supported:

``PowerLog``
    ``C log(gamma_i) + A alpha_i gbar_{-i} - M q_i``
``ThroughputLog``
    ``C log(gamma_i) + A alpha_i gbar_{-i} - M gamma_i``
``PowerProportional``
    ``C gamma_i + A alpha_i gbar_{-i} - M q_i``

In ``Static`` altruism mode the factor multiplying the others' throughput is
the constant 1 instead of ``alpha_i``.

Every player-indexed function here is zero-based.
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DomainError

#: Clamp applied before evaluating log utilities and inside all dynamics.
EPS = 1e-6


class Variant(str, enum.Enum):
    POWER_LOG = "PowerLog"
    THROUGHPUT_LOG = "ThroughputLog"
    POWER_PROPORTIONAL = "PowerProportional"


class AltruismMode(str, enum.Enum):
    DYNAMIC = "Dynamic"
    STATIC = "Static"


@dataclass(frozen=True)
class UtilityVariant:
    tag: Variant = Variant.POWER_LOG
    altruism_mode: AltruismMode = AltruismMode.DYNAMIC

    def __post_init__(self):
        object.__setattr__(self, "tag", Variant(self.tag))
        object.__setattr__(self, "altruism_mode", AltruismMode(self.altruism_mode))

    @property
    def uses_log(self) -> bool:
        return self.tag is not Variant.POWER_PROPORTIONAL

    @property
    def throughput_cost(self) -> bool:
        return self.tag is Variant.THROUGHPUT_LOG

    @property
    def static(self) -> bool:
        return self.altruism_mode is AltruismMode.STATIC

    def __str__(self):
        return f"{self.tag.value}/{self.altruism_mode.value}"


@dataclass(frozen=True)
class PlayerParams:
    """Utility weight ``C``, altruism weight ``A``, cost weight ``M`` and play rate ``r``."""

    C: float
    A: float = 0.0
    M: float = 1.0
    r: float = 1.0

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be > 0, got {self.C}")
        if not self.A >= 0:
            raise ValueError(f"A must be >= 0, got {self.A}")
        if not self.M > 0:
            raise ValueError(f"M must be > 0, got {self.M}")
        if not self.r > 0:
            raise ValueError(f"r must be > 0, got {self.r}")

    @classmethod
    def from_normalized(cls, c: float, a: float, M: float = 1.0, r: float = 1.0) -> "PlayerParams":
        return cls(C=c * M, A=a * M, M=M, r=r)

    @property
    def c(self) -> float:
        return self.C / self.M

    @property
    def a(self) -> float:
        return self.A / self.M


@dataclass(frozen=True)
class GameSpec:
    players: tuple[PlayerParams, ...]
    variant: UtilityVariant = field(default_factory=UtilityVariant)

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        if len(self.players) < 2:
            raise ValueError("a game needs at least 2 players")

    @classmethod
    def identical(cls, N: int, c: float, a: float, variant: UtilityVariant | None = None,
                  M: float = 1.0, rates: Sequence[float] | None = None) -> "GameSpec":
        """N players sharing the normalized parameters ``c`` and ``a``."""
        rates = [1.0] * N if rates is None else list(rates)
        if len(rates) != N:
            raise ValueError("need one rate per player")
        players = tuple(PlayerParams.from_normalized(c, a, M=M, r=r) for r in rates)
        return cls(players, variant or UtilityVariant())

    @property
    def N(self) -> int:
        return len(self.players)

    @functools.cached_property
    def C(self) -> np.ndarray:
        return np.array([p.C for p in self.players], dtype=float)

    @functools.cached_property
    def A(self) -> np.ndarray:
        return np.array([p.A for p in self.players], dtype=float)

    @functools.cached_property
    def M(self) -> np.ndarray:
        return np.array([p.M for p in self.players], dtype=float)

    @functools.cached_property
    def r(self) -> np.ndarray:
        return np.array([p.r for p in self.players], dtype=float)

    @property
    def is_identical(self) -> bool:
        """True when all players share C, A and M (rates may differ)."""
        first = self.players[0]
        return all((p.C, p.A, p.M) == (first.C, first.A, first.M) for p in self.players)

    def with_rates(self, rates: Sequence[float]) -> "GameSpec":
        if len(rates) != self.N:
            raise ValueError("need one rate per player")
        return GameSpec(tuple(replace(p, r=float(r)) for p, r in zip(self.players, rates)),
                        self.variant)


def as_profile(q, N: int | None = None) -> np.ndarray:
    """Validate a strategy profile and return it as a float array."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 1 or q.size < 2:
        raise ValueError("a strategy profile is a vector of at least 2 probabilities")
    if N is not None and q.size != N:
        raise ValueError(f"profile has {q.size} entries, game has {N} players")
    if not np.all((q >= 0) & (q <= 1)):
        raise ValueError("transmission probabilities must lie in [0, 1]")
    return q


def clamp(q, eps: float = EPS) -> np.ndarray:
    return np.clip(q, eps, 1.0 - eps)


def _check_index(q, i):
    if not -len(q) <= i < len(q) or isinstance(i, bool):
        raise IndexError(f"player index {i} out of range for {len(q)} players")
    return i % len(q)


def _pair_products(W: np.ndarray) -> np.ndarray:
    """``out[..., i, j] = prod_{k not in {i, j}} W[..., k]``.

    The diagonal ``out[..., i, i]`` is the leave-one-out product.
    Products are taken directly so zero factors are handled exactly.
    """
    N = W.shape[-1]
    k = np.arange(N)
    skip = (k[:, None, None] == k[None, None, :]) | (k[None, :, None] == k[None, None, :])
    return np.prod(np.where(skip, 1.0, W[..., None, None, :]), axis=-1)


def _alpha_and_S(Q: np.ndarray):
    """Altruism factors and ``S_i = (1/(N-1)) sum_{j != i} q_j prod_{k != i,j} (1 - q_k)``.

    ``mean_others_throughput_i = (1 - q_i) * S_i``; neither quantity depends on ``q_i``.
    """
    N = Q.shape[-1]
    W = 1.0 - Q
    if np.all(W > 0):
        # no zero factors: divide out of the full product instead of forming pair products
        alpha = np.prod(W, axis=-1, keepdims=True) / W
        z = Q / W
        S = alpha * (np.sum(z, axis=-1, keepdims=True) - z) / (N - 1)
        return alpha, S
    L2 = _pair_products(W)
    alpha = np.diagonal(L2, axis1=-2, axis2=-1)
    off = ~np.eye(N, dtype=bool)
    S = np.sum(np.where(off, Q[..., None, :] * L2, 0.0), axis=-1) / (N - 1)
    return alpha, S


def throughput(q, i: int) -> float:
    q = as_profile(q)
    i = _check_index(q, i)
    return float(q[i] * np.prod(np.delete(1.0 - q, i)))


def altruism_factor(q, i: int) -> float:
    q = as_profile(q)
    i = _check_index(q, i)
    return float(np.prod(np.delete(1.0 - q, i)))


def idle_time(q) -> float:
    """Probability that nobody transmits in a slot."""
    return float(np.prod(1.0 - as_profile(q)))


def throughputs(q) -> np.ndarray:
    """All per-player throughputs at once."""
    q = as_profile(q)
    alpha, _ = _alpha_and_S(q)
    return q * alpha


def mean_others_throughput(q, i: int) -> float:
    q = as_profile(q)
    i = _check_index(q, i)
    gam = throughputs(q)
    return float((gam.sum() - gam[i]) / (q.size - 1))


def _utilities(spec: GameSpec, q: np.ndarray) -> np.ndarray:
    v = spec.variant
    alpha, S = _alpha_and_S(q)
    gamma = q * alpha
    others = (1.0 - q) * S
    weight = 1.0 if v.static else alpha
    if v.uses_log:
        with np.errstate(divide="ignore"):
            own = spec.C * np.log(gamma)
    else:
        own = spec.C * gamma
    cost = spec.M * (gamma if v.throughput_cost else q)
    return own + spec.A * weight * others - cost


def net_utilities(spec: GameSpec, q) -> np.ndarray:
    """Net utility of every player at profile ``q``."""
    q = as_profile(q, spec.N)
    if spec.variant.uses_log and np.any(q == 0):
        raise DomainError("log utility undefined when some q_i = 0")
    return _utilities(spec, q)


def net_utility(spec: GameSpec, q, i: int) -> float:
    q = as_profile(q, spec.N)
    i = _check_index(q, i)
    if spec.variant.uses_log and q[i] == 0:
        raise DomainError(f"log utility undefined at q_{i} = 0")
    return float(_utilities(spec, q)[i])


def gradients(spec: GameSpec, Q) -> np.ndarray:
    """Own-strategy partial derivatives ``dV_i/dq_i`` for every player.

    ``Q`` may be a single profile of shape ``(N,)`` or a batch ``(B, N)``;
    the batch form is what the dynamics integrate.
    """
    Q = np.asarray(Q, dtype=float)
    v = spec.variant
    if v.uses_log and np.any(Q <= 0):
        raise DomainError("log-utility gradient undefined at q_i = 0")
    return _raw_gradients(spec, Q)


def utility_gradient(spec: GameSpec, q, i: int) -> float:
    q = as_profile(q, spec.N)
    i = _check_index(q, i)
    if spec.variant.uses_log and q[i] == 0:
        raise DomainError(f"log-utility gradient undefined at q_{i} = 0")
    with np.errstate(divide="ignore"):
        return float(_raw_gradients(spec, q)[i])


def _raw_gradients(spec, q):
    v = spec.variant
    alpha, S = _alpha_and_S(q)
    own = spec.C / q if v.uses_log else spec.C * alpha
    altruism = spec.A * S if v.static else spec.A * alpha * S
    cost = spec.M * alpha if v.throughput_cost else spec.M
    return own - altruism - cost


def cross_partials(spec: GameSpec, q) -> np.ndarray:
    """Matrix ``D[i, l] = d^2 V_i / (dq_i dq_l)`` at an interior profile.

    This is the Jacobian of the unit-rate gradient field.
    """
    q = as_profile(q, spec.N)
    if np.any((q <= 0) | (q >= 1)):
        raise DomainError("second partials are evaluated at interior profiles only")
    N = q.size
    v = spec.variant
    w = 1.0 - q
    L2 = _pair_products(w)
    alpha, S = _alpha_and_S(q)

    # L3[i, j, l] = prod over k not in {i, j, l} of w_k
    Wi = np.where(np.eye(N, dtype=bool), 1.0, w[None, :])
    L3 = _pair_products(Wi)
    idx = np.arange(N)
    keep = (idx[None, :, None] != idx[:, None, None]) & (idx[None, :, None] != idx[None, None, :])
    inner = np.sum(np.where(keep, q[None, :, None] * L3, 0.0), axis=1)

    dalpha = -L2
    dS = (L2 - inner) / (N - 1)
    weighted = dS if v.static else dalpha * S[:, None] + alpha[:, None] * dS

    C, A, M = spec.C[:, None], spec.A[:, None], spec.M[:, None]
    D = -A * weighted
    if not v.uses_log:
        D = D + C * dalpha
    if v.throughput_cost:
        D = D - M * dalpha
    diag = -spec.C / q**2 if v.uses_log else np.zeros(N)
    D[idx, idx] = diag
    return D


def utility_hessian_cross(spec: GameSpec, q, i: int, l: int) -> float:
    q = as_profile(q, spec.N)
    i = _check_index(q, i)
    l = _check_index(q, l)
    return float(cross_partials(spec, q)[i, l])
