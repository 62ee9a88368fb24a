import numpy as np
import pytest

from aloha_altruism import game_model as gm
from aloha_altruism.equilibrium import SymmetricCondition, find_symmetric_neps
from aloha_altruism.errors import DomainError, HeterogeneousPlayers, NoRoot, NonSymmetric
from aloha_altruism.game_model import AltruismMode, GameSpec, PlayerParams, UtilityVariant, Variant
from aloha_altruism.stability import (Convention, Stability, classify, dynamics_jacobian,
                                      gershgorin_check, is_negative_definite,
                                      jacobian_eigen_max_real, rosen_matrix, stability_report)

from .conftest import ALL_VARIANTS, random_spec

PP = UtilityVariant(Variant.POWER_PROPORTIONAL)


def test_rosen_selfish_diagonal():
    spec = GameSpec((PlayerParams(0.5), PlayerParams(1.5), PlayerParams(2.0)))
    q = np.array([0.1, 0.3, 0.6])
    C = np.array([0.5, 1.5, 2.0])
    assert np.array_equal(rosen_matrix(spec, q), np.diag(-C / q**2))
    assert np.allclose(rosen_matrix(spec, q, "definition"), np.diag(-2 * C / q**2), rtol=1e-15)


def test_rosen_identical_diagonal_proof_convention():
    spec = GameSpec.identical(4, 0.5, 2.0)
    q = np.array([0.2, 0.25, 0.3, 0.35])
    assert np.allclose(np.diag(rosen_matrix(spec, q)), -0.5 / q**2, rtol=1e-15)


@pytest.mark.parametrize("variant", ALL_VARIANTS, ids=str)
def test_rosen_symmetric_and_from_cross_partials(rng, variant):
    for _ in range(50):
        N = int(rng.integers(2, 7))
        spec = random_spec(rng, N, variant)
        q = rng.uniform(0.05, 0.95, N)
        H = rosen_matrix(spec, q)
        assert np.array_equal(H, H.T)
        for i in range(N):
            for j in range(N):
                if i != j:
                    expected = (gm.utility_hessian_cross(spec, q, i, j)
                                + gm.utility_hessian_cross(spec, q, j, i))
                    assert H[i, j] == pytest.approx(expected, rel=1e-12, abs=1e-12)


def _fd_second(spec, q, i, l, h=1e-4):
    def V(di, dl):
        x = q.copy()
        x[i] += di
        x[l] += dl
        return gm.net_utility(spec, x, i)
    return (V(h, h) - V(h, -h) - V(-h, h) + V(-h, -h)) / (4 * h * h)


def test_rosen_matches_finite_differences(rng):
    for variant in ALL_VARIANTS:
        spec = random_spec(rng, 4, variant)
        q = rng.uniform(0.1, 0.9, 4)
        H = rosen_matrix(spec, q, Convention.DEFINITION)
        for i in range(4):
            for j in range(4):
                fd = _fd_second(spec, q, i, j) + _fd_second(spec, q, j, i)
                assert abs(H[i, j] - fd) <= 1e-4 * (1 + abs(fd))


def test_rosen_boundary_error():
    with pytest.raises(DomainError):
        rosen_matrix(GameSpec.identical(3, 0.5, 1.0), [0.2, 0.0, 0.4])


@pytest.mark.parametrize("mode", list(AltruismMode))
def test_offdiagonal_bound_power_log(rng, mode):
    variant = UtilityVariant(Variant.POWER_LOG, mode)
    for _ in range(1000):
        N = int(rng.integers(2, 9))
        A = rng.uniform(0.1, 5.0)
        spec = GameSpec(tuple(PlayerParams(1.0, A) for _ in range(N)), variant)
        H = rosen_matrix(spec, rng.uniform(1e-3, 1 - 1e-3, N))
        assert np.max(np.abs(H[~np.eye(N, dtype=bool)])) <= 2 * A * (1 + 1e-12)


# -- Gershgorin -------------------------------------------------------------------

def test_gershgorin_examples():
    assert gershgorin_check(GameSpec(tuple(PlayerParams(10.0, 1.0) for _ in range(4))))
    assert not gershgorin_check(GameSpec(tuple(PlayerParams(6.0, 1.0) for _ in range(4))))
    A = 3.0
    assert gershgorin_check(GameSpec(tuple(PlayerParams(2 * A + 1e-9, A) for _ in range(2))))


def test_gershgorin_heterogeneous():
    with pytest.raises(HeterogeneousPlayers):
        gershgorin_check(GameSpec((PlayerParams(10.0, 1.0), PlayerParams(10.0, 2.0))))


def test_negative_definite_examples():
    assert is_negative_definite(np.diag([-1.0, -2.0]))
    assert not is_negative_definite([[-1.0, 3.0], [3.0, -1.0]])
    with pytest.raises(NonSymmetric):
        is_negative_definite([[-1.0, 1.0], [0.0, -1.0]])


def test_implication_chain(rng):
    # Gershgorin => Rosen definiteness everywhere => symmetric NEPs are stable
    for _ in range(200):
        N = int(rng.integers(2, 9))
        A = rng.uniform(0.0, 5.0)
        C = 2 * (N - 1) * A + rng.uniform(1e-3, 3.0)
        M = rng.uniform(0.5, 2.0)
        spec = GameSpec(tuple(PlayerParams(C, A, M) for _ in range(N)))
        assert gershgorin_check(spec)
        for _ in range(5):
            assert is_negative_definite(rosen_matrix(spec, rng.uniform(1e-3, 1 - 1e-3, N)))
        cond = SymmetricCondition(spec.variant, N, A / M, C / M)
        try:
            neps = find_symmetric_neps(cond, M=M)
        except NoRoot:
            continue
        for nep in neps:
            if np.all((nep.q_star > gm.EPS) & (nep.q_star < 1 - gm.EPS)):
                assert nep.stability is Stability.STABLE


# -- Jacobian ---------------------------------------------------------------------

def test_jacobian_selfish():
    spec = GameSpec((PlayerParams(0.5, r=2.0), PlayerParams(1.0, r=0.5)))
    q = np.array([0.3, 0.6])
    J = dynamics_jacobian(spec, q)
    assert np.allclose(J, np.diag([-2 * 0.5 / 0.09, -0.5 * 1.0 / 0.36]), rtol=1e-14)
    assert stability_report(spec, q).classification is Stability.STABLE


def test_rate_scaling_keeps_classification(rng):
    for _ in range(100):
        N = int(rng.integers(2, 6))
        spec = random_spec(rng, N, ALL_VARIANTS[int(rng.integers(len(ALL_VARIANTS)))])
        q = rng.uniform(0.05, 0.95, N)
        k = rng.uniform(0.1, 10.0)
        scaled = spec.with_rates(spec.r * k)
        assert np.allclose(dynamics_jacobian(scaled, q), k * dynamics_jacobian(spec, q))
        lam, lam_k = jacobian_eigen_max_real(spec, q), jacobian_eigen_max_real(scaled, q)
        if abs(lam) > 1e-6:
            assert np.sign(lam) == np.sign(lam_k)


def test_proportional_interior_nep_unstable():
    (nep,) = find_symmetric_neps(SymmetricCondition(PP, 5, 1.0, 2.0))
    assert 0 < nep.q_star[0] < 1
    assert stability_report(GameSpec.identical(5, 2.0, 1.0, PP), nep.q_star).classification \
        is Stability.UNSTABLE
    assert nep.stability is Stability.UNSTABLE


def test_classify_band():
    assert classify(-2e-9) is Stability.STABLE
    assert classify(2e-9) is Stability.UNSTABLE
    assert classify(5e-10) is Stability.INCONCLUSIVE
    assert classify(-1e-9) is Stability.INCONCLUSIVE


def test_report_conventions_agree_on_selfish_game():
    spec = GameSpec.identical(3, 0.5, 0.0)
    q = [0.5, 0.5, 0.5]
    a = stability_report(spec, q, "proof")
    b = stability_report(spec, q, "definition")
    assert a.rosen_negative_definite and b.rosen_negative_definite
    assert a.to_dict()["classification"] == "Stable"


def test_report_boundary_is_inconclusive():
    rep = stability_report(GameSpec.identical(2, 0.5, 1.0), [0.0, 0.5])
    assert rep.classification is Stability.INCONCLUSIVE
    assert np.isnan(rep.jacobian_eigen_max_real)


def test_report_heterogeneous_skips_gershgorin():
    spec = GameSpec((PlayerParams(1.0, 1.0), PlayerParams(1.0, 2.0)))
    assert stability_report(spec, [0.3, 0.3]).gershgorin_bound_holds is None
