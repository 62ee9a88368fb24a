import numpy as np
import pytest

from aloha_altruism import game_model as gm
from aloha_altruism.slot_sim import (CHUNK_SLOTS, SlotBatchResult, estimate_observables,
                                     simulate_range, simulate_slots)


def _sigma(p, n):
    return np.sqrt(p * (1 - p) / n)


def test_full_power_all_collide():
    b = simulate_slots([1.0, 1.0], 5000, seed=1)
    assert b.collisions == 5000 and b.idle == 0 and b.successes.sum() == 0


def test_silent_batch_observables():
    b = simulate_slots([0.0, 0.0, 0.0], 1000, seed=3)
    obs = estimate_observables(b, 0)
    assert (obs.throughput, obs.altruism, obs.idle) == (0.0, 1.0, 1.0)


def test_two_player_half():
    b = simulate_slots([0.5, 0.5], 10**6, seed=11)
    for i in range(2):
        assert abs(b.successes[i] / b.slots - 0.25) <= 0.002


def test_symmetric_four_players():
    b = simulate_slots([0.22] * 4, 10**6, seed=12)
    for i in range(4):
        assert abs(b.successes[i] / b.slots - 0.1044) <= 0.0013


def test_conservation_and_at_most_one_success(rng):
    for _ in range(20):
        N = int(rng.integers(2, 6))
        b = simulate_slots(rng.uniform(0, 1, N), int(rng.integers(1, 20000)), int(rng.integers(1 << 32)))
        assert b.successes.sum() + b.idle + b.collisions == b.slots


def test_batch_rejects_inconsistent_counts():
    with pytest.raises(ValueError):
        SlotBatchResult(10, np.array([3, 3]), 3, 3, 0)


def test_deterministic():
    a = simulate_slots([0.3, 0.6, 0.1], 200_000, seed=99)
    b = simulate_slots([0.3, 0.6, 0.1], 200_000, seed=99)
    assert a.to_dict() == b.to_dict()
    c = simulate_slots([0.3, 0.6, 0.1], 200_000, seed=100)
    assert a.to_dict() != c.to_dict()


@pytest.mark.parametrize("workers", [2, 3, 7])
def test_partition_invariant(workers):
    q = [0.3, 0.6, 0.1]
    slots = 3 * CHUNK_SLOTS + 12345
    whole = simulate_slots(q, slots, seed=5)
    assert simulate_slots(q, slots, seed=5, workers=workers).to_dict() == whole.to_dict()
    cut = CHUNK_SLOTS + 777
    merged = simulate_range(q, 0, cut, 5) + simulate_range(q, cut, slots, 5)
    assert merged.to_dict() == whole.to_dict()


def test_slots_positive():
    with pytest.raises(ValueError):
        simulate_slots([0.5, 0.5], 0, seed=1)


@pytest.mark.parametrize("slots", [10**4, 10**5, 10**6])
def test_observables_converge(slots):
    q = np.array([0.3, 0.4, 0.5])
    b = simulate_slots(q, slots, seed=slots)
    for i in range(3):
        obs = estimate_observables(b, i)
        gamma = gm.throughput(q, i)
        alpha = gm.altruism_factor(q, i)
        idle = gm.idle_time(q)
        assert abs(obs.throughput - gamma) <= 4 * _sigma(gamma, slots)
        assert abs(obs.idle - idle) <= 4 * _sigma(idle, slots)
        assert abs(obs.altruism - alpha) <= 4 * _sigma(alpha, slots)
        others = gm.mean_others_throughput(q, i)
        # each others' frequency has its own binomial error; bound the mean loosely by the worst
        assert abs(obs.mean_others_throughput - others) <= 4 * max(
            _sigma(gm.throughput(q, j), slots) for j in range(3) if j != i)


def test_unbiased_over_seeds():
    q = np.array([0.2, 0.35, 0.5, 0.1])
    slots = 10_000
    est = np.array([simulate_slots(q, slots, seed=s).successes / slots for s in range(100)])
    for i in range(4):
        sem = est[:, i].std(ddof=1) / np.sqrt(len(est))
        assert abs(est[:, i].mean() - gm.throughput(q, i)) < 3 * sem


def test_observable_index_error():
    b = simulate_slots([0.2, 0.2], 100, seed=0)
    with pytest.raises(IndexError):
        estimate_observables(b, 2)
