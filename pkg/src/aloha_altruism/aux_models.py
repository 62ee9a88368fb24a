"""Small companion models: single-slot chicken game, total ALOHA throughput, water-filling."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TX, NO_TX = "Tx", "noTx"
ACTIONS = (TX, NO_TX)


@dataclass(frozen=True)
class ChickenGame:
    xi: float  # cost of a transmission; a success is worth 1

    def __post_init__(self):
        if not 0 < self.xi < 1:
            raise ValueError("transmission cost must lie in (0, 1)")


@dataclass(frozen=True)
class ChickenEquilibria:
    pure: tuple
    mixed: float


def chicken_payoff_matrix(g: ChickenGame) -> dict:
    """Payoffs ``(player 1, player 2)`` keyed by the action pair ``(a1, a2)``."""
    xi = g.xi
    return {
        (TX, TX): (-xi, -xi),
        (TX, NO_TX): (1 - xi, 0.0),
        (NO_TX, TX): (0.0, 1 - xi),
        (NO_TX, NO_TX): (0.0, 0.0),
    }


def _is_pure_nash(table, profile) -> bool:
    for player in (0, 1):
        for dev in ACTIONS:
            alt = list(profile)
            alt[player] = dev
            if table[tuple(alt)][player] > table[profile][player]:
                return False
    return True


def chicken_equilibria(g: ChickenGame) -> ChickenEquilibria:
    """Pure equilibria by unilateral-deviation enumeration, plus the mixed one.

    In the mixed equilibrium each player transmits with probability
    ``1 - xi``, which leaves the opponent indifferent: transmitting earns
    ``(1 - xi)(1 - q) - xi q = 0``, the payoff of staying silent.
    """
    table = chicken_payoff_matrix(g)
    pure = tuple(p for p in itertools.product(ACTIONS, repeat=2) if _is_pure_nash(table, p))
    return ChickenEquilibria(pure=pure, mixed=1.0 - g.xi)


def expected_net_gain(g: ChickenGame, q_self: float, q_other: float) -> float:
    return (1 - g.xi) * q_self * (1 - q_other) - g.xi * q_self * q_other


def total_throughput(q, N: int):
    """Channel throughput ``N q (1 - q)^(N-1)`` when all N nodes use ``q``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    q = np.asarray(q, dtype=float)
    out = N * q * (1 - q) ** (N - 1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class WaterFillingInput:
    demands: tuple  # ordered by descending round-trip time
    capacity: float

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(float(d) for d in self.demands))
        if any(d < 0 for d in self.demands):
            raise ValueError("demands must be non-negative")
        if self.capacity < 0:
            raise ValueError("capacity must be non-negative")


def water_filling(inp: WaterFillingInput | Sequence[float], capacity: float | None = None) -> np.ndarray:
    """Sequential allocation ``d_k = min(D_k, max(capacity - sum_{j<k} D_j, 0))``.

    Note the remaining capacity subtracts earlier *demands*, not earlier
    allocations; the two agree whenever earlier demands were served in full.
    """
    if not isinstance(inp, WaterFillingInput):
        inp = WaterFillingInput(tuple(inp), capacity)
    D = np.array(inp.demands, dtype=float)
    before = np.concatenate(([0.0], np.cumsum(D)[:-1]))
    return np.minimum(D, np.maximum(inp.capacity - before, 0.0))
