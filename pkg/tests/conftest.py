import itertools

import numpy as np
import pytest

from aloha_altruism.game_model import AltruismMode, GameSpec, PlayerParams, UtilityVariant, Variant

ALL_VARIANTS = [UtilityVariant(t, m) for t in Variant for m in AltruismMode]


def enumerate_slot(q):
    """Exact slot-outcome probabilities by summing over all 2^N transmit patterns.

    Returns (per-player success probability, idle probability, collision probability).
    """
    q = np.asarray(q, dtype=float)
    N = q.size
    success = np.zeros(N)
    idle = collision = 0.0
    for pattern in itertools.product((0, 1), repeat=N):
        tx = np.array(pattern, dtype=bool)
        p = float(np.prod(np.where(tx, q, 1 - q)))
        if tx.sum() == 0:
            idle += p
        elif tx.sum() == 1:
            success[np.flatnonzero(tx)[0]] += p
        else:
            collision += p
    return success, idle, collision


def brute_utility(spec, q, i):
    """Net utility written straight from the definitions, using enumeration."""
    q = np.asarray(q, dtype=float)
    gam, idle, _ = enumerate_slot(q)
    alpha = 1.0 if spec.variant.static else gam[i] + idle
    others = (gam.sum() - gam[i]) / (len(q) - 1)
    p = spec.players[i]
    own = p.C * np.log(gam[i]) if spec.variant.uses_log else p.C * gam[i]
    cost = p.M * (gam[i] if spec.variant.throughput_cost else q[i])
    return own + p.A * alpha * others - cost


def random_spec(rng, N, variant, identical=False):
    if identical:
        C, A, M = rng.uniform(0.2, 2.0), rng.uniform(0, 5), rng.uniform(0.5, 2)
        players = [PlayerParams(C, A, M) for _ in range(N)]
    else:
        players = [PlayerParams(rng.uniform(0.2, 2.0), rng.uniform(0, 5), rng.uniform(0.5, 2),
                                rng.uniform(0.5, 2)) for _ in range(N)]
    return GameSpec(tuple(players), variant)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, filled in by test_acceptance and printed at the end
ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])
