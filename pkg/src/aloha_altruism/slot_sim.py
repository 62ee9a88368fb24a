"""Slot-level Monte Carlo of the slotted-ALOHA channel.

Every slot each player transmits independently with probability ``q_i``; the
slot carries a success iff exactly one player transmits. Random numbers come
from a Philox counter-based generator keyed by the seed, with one counter
block per chunk of ``CHUNK_SLOTS`` slots, so any partition of the slot range
reproduces the same batch.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .game_model import as_profile

CHUNK_SLOTS = 1 << 16


@dataclass(eq=False)
class SlotBatchResult:
    slots: int
    successes: np.ndarray
    idle: int
    collisions: int
    seed: int

    def __post_init__(self):
        self.successes = np.asarray(self.successes, dtype=np.int64)
        if int(self.successes.sum()) + self.idle + self.collisions != self.slots:
            raise ValueError("successes + idle + collisions must equal slots")

    def __add__(self, other: "SlotBatchResult") -> "SlotBatchResult":
        if self.seed != other.seed:
            raise ValueError("cannot merge batches drawn from different seeds")
        return SlotBatchResult(self.slots + other.slots, self.successes + other.successes,
                               self.idle + other.idle, self.collisions + other.collisions,
                               self.seed)

    def to_dict(self) -> dict:
        return {
            "slots": self.slots,
            "successes": self.successes.tolist(),
            "idle": self.idle,
            "collisions": self.collisions,
            "seed": self.seed,
        }


def _chunk_uniforms(seed: int, chunk: int, start: int, stop: int, N: int) -> np.ndarray:
    # the chunk index lives in the top counter word; draws advance the bottom one
    bitgen = np.random.Philox(key=seed, counter=[0, 0, 0, chunk])
    u = np.random.Generator(bitgen).random((CHUNK_SLOTS, N))
    return u[start:stop]


def simulate_range(q, first_slot: int, last_slot: int, seed: int) -> SlotBatchResult:
    """Simulate slots ``first_slot <= s < last_slot``."""
    q = as_profile(q)
    N = q.size
    successes = np.zeros(N, dtype=np.int64)
    idle = collisions = 0
    s = first_slot
    while s < last_slot:
        chunk, offset = divmod(s, CHUNK_SLOTS)
        stop = min(CHUNK_SLOTS, offset + last_slot - s)
        tx = _chunk_uniforms(seed, chunk, offset, stop, N) < q
        count = tx.sum(axis=1)
        single = count == 1
        successes += tx[single].sum(axis=0)
        idle += int(np.sum(count == 0))
        collisions += int(np.sum(count > 1))
        s += stop - offset
    return SlotBatchResult(last_slot - first_slot, successes, idle, collisions, seed)


def simulate_slots(q, slots: int, seed: int, workers: int = 1) -> SlotBatchResult:
    """Simulate ``slots`` slots; deterministic in ``seed`` whatever ``workers`` is."""
    if slots < 1:
        raise ValueError("slots must be >= 1")
    q = as_profile(q)
    if workers <= 1:
        return simulate_range(q, 0, slots, seed)
    bounds = np.linspace(0, slots, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda k: simulate_range(q, bounds[k], bounds[k + 1], seed),
                              range(workers)))
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total


@dataclass(frozen=True)
class Observables:
    throughput: float
    altruism: float
    idle: float
    mean_others_throughput: float


def estimate_observables(batch: SlotBatchResult, i: int) -> Observables:
    """Empirical counterparts of ``gamma_i``, ``alpha_i``, idle time and ``gbar_{-i}``.

    The altruism factor is estimated the way a node would: its own success
    frequency plus the idle frequency.
    """
    if batch.slots < 1:
        raise ValueError("empty batch")
    N = batch.successes.size
    if not -N <= i < N:
        raise IndexError(f"player index {i} out of range for {N} players")
    freq = batch.successes / batch.slots
    gamma = float(freq[i])
    idle = batch.idle / batch.slots
    others = float((freq.sum() - freq[i]) / (N - 1))
    return Observables(gamma, gamma + idle, idle, others)
