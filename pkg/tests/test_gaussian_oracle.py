import math

import numpy as np
import pytest
from scipy.integrate import quad

from langevin_kl.gaussian_oracle import (
    GaussianLaw,
    exact_flow_law,
    fisher_info_relative,
    gaussian_1d,
    kl_gaussian,
    kl_trajectory,
    stationary_law,
    target_law,
    tv_gaussian_1d,
    ula_step_law,
    w2_gaussian,
)
from langevin_kl.planner import plan_strong


def _pdf(x, mu, var):
    return np.exp(-0.5 * (x - mu) ** 2 / var) / math.sqrt(2.0 * math.pi * var)


def _kl_quadrature(mp, vp, mq, vq):
    """Independent 1-D KL oracle by adaptive quadrature of p log(p/q)."""
    lo = mp - 12.0 * math.sqrt(vp)
    hi = mp + 12.0 * math.sqrt(vp)
    val, _ = quad(
        lambda x: _pdf(x, mp, vp) * (np.log(_pdf(x, mp, vp)) - np.log(_pdf(x, mq, vq))),
        lo,
        hi,
        limit=200,
    )
    return val


def _fisher_quadrature(mp, vp, a):
    """Independent oracle for E_p (a x - (x - mp)/vp)^2 against N(0, 1/a)."""
    lo = mp - 12.0 * math.sqrt(vp)
    hi = mp + 12.0 * math.sqrt(vp)
    val, _ = quad(lambda x: (a * x - (x - mp) / vp) ** 2 * _pdf(x, mp, vp), lo, hi, limit=200)
    return val


def _random_spd(rng, d):
    w = rng.uniform(0.3, 3.0, size=d)
    if d == 1:
        return np.array([[w[0]]])
    q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    return (q * w) @ q.T


def _random_law(rng, d):
    return GaussianLaw(rng.normal(0.0, 1.0, size=d), _random_spd(rng, d))


# ---------------------------------------------------------------------------
# construction


def test_law_validation():
    with pytest.raises(ValueError, match="symmetric"):
        GaussianLaw(np.zeros(2), np.array([[1.0, 0.5], [0.2, 1.0]]))
    with pytest.raises(ValueError, match="positive definite"):
        GaussianLaw(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError, match="shape"):
        GaussianLaw(np.zeros(2), np.eye(3))


def test_diagonal_cov_argument_is_read_as_diagonal():
    law = GaussianLaw(np.zeros(2), np.array([1.0, 2.0]))
    assert np.allclose(law.cov, np.diag([1.0, 2.0]))


# ---------------------------------------------------------------------------
# law propagation


def test_ula_step_law_variance_update():
    for v in (0.5, 1.0, 2.0):
        out = ula_step_law(gaussian_1d(0.0, v), np.array([[1.0]]), 0.25)
        assert out.cov[0, 0] == pytest.approx(0.5625 * v + 0.5, abs=1e-14)


def test_ula_step_law_mean_annihilated_at_h_equal_inverse_a():
    out = ula_step_law(GaussianLaw([1.0], [[1.0]]), np.array([[1.0]]), 1.0)
    assert out.mean[0] == 0.0


def test_ula_step_law_fixed_point_is_stationary_law():
    # v* solves v = (1 - h a)^2 v + 2h => v* = 2h/(1 - (1-ha)^2) = 8/7
    h, a = 0.25, 1.0
    vstar = 2.0 * h / (1.0 - (1.0 - h * a) ** 2)
    assert vstar == pytest.approx(8.0 / 7.0)
    st = stationary_law(np.array([[a]]), h)
    assert st.cov[0, 0] == pytest.approx(vstar, abs=1e-14)
    out = ula_step_law(st, np.array([[a]]), h)
    assert abs(out.cov[0, 0] - st.cov[0, 0]) <= 1e-12


def test_ula_step_law_instability_rejected():
    with pytest.raises(ValueError, match="unstable"):
        ula_step_law(gaussian_1d(0.0, 1.0), np.array([[1.0]]), 2.0)
    with pytest.raises(ValueError, match="unstable"):
        stationary_law(np.array([[4.0]]), 0.5)


def test_stationary_law_values():
    assert stationary_law(np.array([[1.0]]), 0.5).cov[0, 0] == pytest.approx(4.0 / 3.0)
    # h -> 0 recovers the target variance 1/a
    st = stationary_law(np.diag([1.0, 2.0]), 1e-8)
    assert np.allclose(np.diagonal(st.cov), [1.0, 0.5], atol=1e-6)


def test_stationary_law_fixed_point_full_matrix():
    rng = np.random.default_rng(7)
    A = _random_spd(rng, 3)
    h = 0.3 / float(np.linalg.eigvalsh(A)[-1])
    st = stationary_law(A, h)
    out = ula_step_law(st, A, h)
    assert np.allclose(out.cov, st.cov, atol=1e-12)
    assert np.allclose(out.mean, 0.0, atol=1e-15)


def test_semigroup_matches_direct_power_formula():
    # independent oracle: M^k law plus the geometric noise sum by eigenexpansion
    rng = np.random.default_rng(3)
    A = _random_spd(rng, 3)
    law = _random_law(rng, 3)
    h = 0.2 / float(np.linalg.eigvalsh(A)[-1])
    k = 37
    stepped = law
    for _ in range(k):
        stepped = ula_step_law(stepped, A, h)
    M = np.eye(3) - h * A
    Mk = np.linalg.matrix_power(M, k)
    w, Q = np.linalg.eigh(M)
    geo = (1.0 - (w * w) ** k) / (1.0 - w * w)
    noise = (Q * (2.0 * h * geo)) @ Q.T
    mean = Mk @ law.mean
    cov = Mk @ law.cov @ Mk.T + noise
    assert np.allclose(stepped.mean, mean, atol=1e-12)
    assert np.allclose(stepped.cov, cov, atol=1e-12)


def test_exact_flow_law():
    A = np.array([[1.0]])
    init = gaussian_1d(0.0, 2.0)
    same = exact_flow_law(A, init, 0.0)
    assert same.cov[0, 0] == pytest.approx(2.0)
    late = exact_flow_law(A, init, 50.0)
    assert late.cov[0, 0] == pytest.approx(1.0, abs=1e-12)
    mid = exact_flow_law(A, init, math.log(2.0) / 2.0)
    assert mid.cov[0, 0] == pytest.approx(1.5, abs=1e-14)
    with pytest.raises(ValueError, match="diagonal"):
        exact_flow_law(np.array([[1.0, 0.1], [0.1, 1.0]]), GaussianLaw(np.zeros(2), np.eye(2)), 1.0)


# ---------------------------------------------------------------------------
# divergences


def test_kl_gaussian_basics():
    p = gaussian_1d(0.0, 8.0 / 7.0)
    q = gaussian_1d(0.0, 1.0)
    assert kl_gaussian(p, p) == pytest.approx(0.0, abs=1e-12)
    closed = 0.5 * (math.log(7.0 / 8.0) + 8.0 / 7.0 - 1.0)
    assert kl_gaussian(p, q) == pytest.approx(closed, abs=1e-14)
    assert closed == pytest.approx(4.663e-3, abs=1e-6)


def test_kl_gaussian_matches_quadrature():
    rng = np.random.default_rng(11)
    for _ in range(10):
        mp, mq = rng.normal(0, 1, size=2)
        vp, vq = rng.uniform(0.4, 3.0, size=2)
        got = kl_gaussian(gaussian_1d(mp, vp), gaussian_1d(mq, vq))
        assert got == pytest.approx(_kl_quadrature(mp, vp, mq, vq), abs=1e-9)


def test_w2_gaussian_basics():
    assert w2_gaussian(gaussian_1d(0, 1), gaussian_1d(1, 1)) == pytest.approx(1.0)
    p = gaussian_1d(0.3, 2.0)
    assert w2_gaussian(p, p) == 0.0
    assert w2_gaussian(gaussian_1d(0, 4), gaussian_1d(0, 1)) == pytest.approx(1.0)


def test_w2_gaussian_bures_agrees_with_diagonal_under_rotation():
    # W2 is invariant under a common rotation; rotating a diagonal pair makes
    # the Bures code path reproduce the diagonal fast path value
    rng = np.random.default_rng(5)
    for _ in range(5):
        d = 3
        mp, mq = rng.normal(size=(2, d))
        vp, vq = rng.uniform(0.3, 3.0, size=(2, d))
        diag_val = math.sqrt(np.sum((mp - mq) ** 2) + np.sum((np.sqrt(vp) - np.sqrt(vq)) ** 2))
        Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
        p = GaussianLaw(Q @ mp, Q @ np.diag(vp) @ Q.T)
        q = GaussianLaw(Q @ mq, Q @ np.diag(vq) @ Q.T)
        assert w2_gaussian(p, q) == pytest.approx(diag_val, abs=1e-10)


def test_tv_gaussian_1d_basics():
    p = gaussian_1d(0.0, 1.0)
    assert tv_gaussian_1d(p, p) == 0.0
    from scipy.special import ndtr

    shifted = tv_gaussian_1d(p, gaussian_1d(1.0, 1.0))
    assert shifted == pytest.approx(2.0 * ndtr(0.5) - 1.0, abs=1e-8)
    assert shifted == pytest.approx(0.38292, abs=1e-5)
    with pytest.raises(ValueError, match="d = 1"):
        tv_gaussian_1d(GaussianLaw(np.zeros(2), np.eye(2)), GaussianLaw(np.zeros(2), np.eye(2)))


def test_pinsker_on_random_pairs():
    rng = np.random.default_rng(17)
    for _ in range(100):
        p = gaussian_1d(rng.normal(0, 2), rng.uniform(0.3, 4.0))
        q = gaussian_1d(rng.normal(0, 2), rng.uniform(0.3, 4.0))
        assert tv_gaussian_1d(p, q) <= math.sqrt(kl_gaussian(p, q) / 2.0) + 1e-8


def test_fisher_info_basics():
    A = np.array([[1.0]])
    assert fisher_info_relative(target_law(A), A) == pytest.approx(0.0, abs=1e-12)
    # 1-D centered: (v - 1/a)^2 a^2 / v = (av - 1)^2/v = 0.5 at v = 2, a = 1
    assert fisher_info_relative(gaussian_1d(0.0, 2.0), A) == pytest.approx(0.5, abs=1e-14)


def test_fisher_info_matches_quadrature():
    rng = np.random.default_rng(23)
    for _ in range(10):
        mp = rng.normal(0, 1)
        vp = rng.uniform(0.4, 3.0)
        a = rng.uniform(0.4, 3.0)
        got = fisher_info_relative(gaussian_1d(mp, vp), np.array([[a]]))
        assert got == pytest.approx(_fisher_quadrature(mp, vp, a), rel=1e-9)


def test_log_sobolev_type_bound_on_random_pairs():
    rng = np.random.default_rng(29)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        A = _random_spd(rng, d)
        m = float(np.linalg.eigvalsh(A)[0])
        p = _random_law(rng, d)
        kl = kl_gaussian(p, target_law(A))
        assert kl <= fisher_info_relative(p, A) / (2.0 * m) + 1e-12


def test_talagrand_type_bound_on_random_pairs():
    rng = np.random.default_rng(31)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        A = _random_spd(rng, d)
        m = float(np.linalg.eigvalsh(A)[0])
        p = _random_law(rng, d)
        tgt = target_law(A)
        assert w2_gaussian(p, tgt) ** 2 <= (2.0 / m) * kl_gaussian(p, tgt) + 1e-9


def test_weak_convexity_bound_on_random_pairs():
    rng = np.random.default_rng(37)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        A = _random_spd(rng, d)
        p = _random_law(rng, d)
        tgt = target_law(A)
        kl = kl_gaussian(p, tgt)
        assert kl <= math.sqrt(fisher_info_relative(p, A)) * w2_gaussian(p, tgt) + 1e-9


def test_dissipation_identity_along_exact_flow():
    # centered difference of KL along the flow vs -fisher, 20 diagonal cases
    rng = np.random.default_rng(41)
    delta = 1e-5
    for _ in range(20):
        d = int(rng.integers(1, 4))
        a = rng.uniform(0.3, 3.0, size=d)
        A = np.diag(a)
        init = GaussianLaw(rng.uniform(-2, 2, size=d), np.diag(rng.uniform(0.4, 3.0, size=d)))
        t = float(rng.uniform(0.05, 1.0))
        tgt = target_law(A)
        dkl = (
            kl_gaussian(exact_flow_law(A, init, t + delta), tgt)
            - kl_gaussian(exact_flow_law(A, init, t - delta), tgt)
        ) / (2.0 * delta)
        fisher = fisher_info_relative(exact_flow_law(A, init, t), A)
        assert abs(dkl + fisher) <= 1e-3 * fisher


# ---------------------------------------------------------------------------
# trajectories


def test_kl_trajectory_reference_run():
    plan = plan_strong(1, 2, 2, 0.1)
    A = np.diag([1.0, 2.0])
    traj = kl_trajectory(A, GaussianLaw(np.zeros(2), np.eye(2)), plan.h, plan.k)
    assert len(traj) == plan.k + 1
    assert traj[-1] <= 0.1
    # monotone non-increasing while the gap is above the target
    arr = np.asarray(traj)
    above = arr[:-1] >= 0.1
    assert np.all(np.diff(arr)[above] <= 1e-15)


def test_kl_trajectory_from_target_rises_to_stationary_gap():
    A = np.array([[1.0]])
    traj = kl_trajectory(A, target_law(A), 0.01, 200)
    assert traj[0] == pytest.approx(0.0, abs=1e-12)
    assert traj[-1] > traj[0]
    gap = kl_gaussian(stationary_law(A, 0.01), target_law(A))
    assert traj[-1] <= gap + 1e-12
