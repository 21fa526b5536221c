"""End-to-end acceptance criteria A1-A8, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines and margins.
"""

import math

import numpy as np
import pytest

import langevin_kl as lk


def _report(name: str, ok: bool, detail: str = ""):
    print(f"{name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"{name} failed: {detail}"


# ---------------------------------------------------------------------------


def test_a1_strong_kl_convergence_and_tv_w2_targets():
    # A = diag(1, 2): m = 1, L = 2, d = 2; p0 = N(0, I/m) = N(0, I)
    plan = lk.plan_strong(1, 2, 2, 0.1)
    assert (plan.h, plan.k) == (pytest.approx(7.8125e-4, abs=1e-12), 4722)
    A = np.diag([1.0, 2.0])
    traj = lk.kl_trajectory(A, lk.GaussianLaw(np.zeros(2), np.eye(2)), plan.h, plan.k)
    _report("A1 strong-convexity KL target", traj[-1] <= 0.1, f"final KL {traj[-1]:.3e} <= 0.1")

    # A1b: rescaled 1-D problem m = L = 1, eps = 0.05 for the TV/W2 targets
    plan_b = lk.plan_strong(1, 1, 1, 0.05)
    assert (plan_b.h, plan_b.k) == (pytest.approx(0.003125, abs=1e-15), 959)
    A1 = np.array([[1.0]])
    law = lk.GaussianLaw([0.0], [[1.0]])
    for _ in range(plan_b.k):
        law = lk.ula_step_law(law, A1, plan_b.h)
    tgt = lk.target_law(A1)
    tv = lk.tv_gaussian_1d(law, tgt)
    w2 = lk.w2_gaussian(law, tgt)
    _report(
        "A1b TV target", tv <= math.sqrt(0.05), f"tv {tv:.3e} <= sqrt(eps) {math.sqrt(0.05):.4f}"
    )
    _report(
        "A1b W2 target",
        w2 <= math.sqrt(2 * 0.05 / 1),
        f"w2 {w2:.3e} <= sqrt(2 eps/m) {math.sqrt(0.1):.4f}",
    )


def test_a2_moment_bound_exact_and_empirical():
    plan = lk.plan_strong(1, 2, 2, 0.1)
    A = np.diag([1.0, 2.0])
    bound = 4.0 * 2 / 1.0  # 4d/m = 8

    law = lk.GaussianLaw(np.zeros(2), np.eye(2))
    worst = -math.inf
    for _ in range(plan.k):
        law = lk.ula_step_law(law, A, plan.h)
        worst = max(worst, float(np.trace(law.cov) + law.mean @ law.mean))
    _report("A2 exact second-moment bound", worst <= bound + 1e-9, f"max {worst:.6f} <= 8 + 1e-9")

    pot = lk.quadratic_diagonal([1.0, 2.0])
    ens = lk.init_ensemble(pot, lk.GAUSSIAN_1_OVER_M, 20_000, seed=20240211)
    _, rows = lk.run(ens, plan, record_every=100)
    margin = min(bound + 5.0 * r.second_moment_se - r.second_moment for r in rows)
    _report(
        "A2 empirical second-moment bound",
        margin >= 0.0,
        f"min margin {margin:.4f} over {len(rows)} recorded steps",
    )


def test_a3_w2_contraction_oracle_and_coupled():
    plan = lk.plan_strong(1, 2, 2, 0.1)
    A = np.diag([1.0, 2.0])
    pi_h = lk.stationary_law(A, plan.h)
    law = lk.GaussianLaw(np.zeros(2), np.eye(2))
    prev = lk.w2_gaussian(law, pi_h)
    worst = math.inf
    for _ in range(plan.k):
        law = lk.ula_step_law(law, A, plan.h)
        now = lk.w2_gaussian(law, pi_h)
        worst = min(worst, prev - now)
        prev = now
    _report(
        "A3 oracle W2 contraction",
        worst >= -1e-12,
        f"worst per-step increase {-worst:.3e} <= 1e-12",
    )

    hub = lk.huber(1.0)
    tr = lk.coupled_run(
        hub,
        lk.GaussianInit(mean=np.zeros(1), cov_diag=np.full(1, 4.0)),
        lk.GaussianInit(mean=np.full(1, 1.5), cov_diag=np.ones(1)),
        h=0.1,
        k=200,
        n=10_000,
        seed=99,
    )
    margin = float(np.min(tr.rms[:-1] + 5.0 * tr.se[:-1] - tr.rms[1:]))
    _report("A3 coupled huber contraction", margin >= 0.0, f"min 5-SE margin {margin:.4f}")


def test_a4_sampler_matches_oracle():
    pot = lk.quadratic_diagonal([1.0, 2.0])
    A = np.diag([1.0, 2.0])
    ens = lk.init_ensemble(pot, lk.GAUSSIAN_1_OVER_M, 50_000, seed=4242)
    law = lk.GaussianLaw(np.zeros(2), np.eye(2))
    for _ in range(200):
        ens = lk.step(ens, 0.01)
        law = lk.ula_step_law(law, A, 0.01)
    z = lk.z_scores_vs_oracle(lk.summarize(ens), law)
    zmax = max(
        float(np.max(np.abs(z["mean"]))),
        float(np.max(np.abs(z["cov"]))),
        abs(z["second_moment"]),
    )
    _report("A4 sampler vs oracle z-scores", zmax <= 5.0, f"max |z| = {zmax:.3f} <= 5")


def test_a5_oracle_equivalence():
    pot = lk.quadratic_diagonal([1.0])
    A = np.array([[1.0]])
    grid = lk.discretize_gaussian(0.0, 1.0, -8.0, 8.0, 4096)
    law = lk.GaussianLaw([0.0], [[1.0]])
    tgt_grid = lk.target_density_grid(pot, -8.0, 8.0, 4096)
    tgt_law = lk.target_law(A)
    worst = 0.0
    for _ in range(50):
        grid = lk.ula_step_grid(grid, pot, 0.1)
        law = lk.ula_step_law(law, A, 0.1)
        worst = max(worst, abs(lk.kl_grid(grid, tgt_grid) - lk.kl_gaussian(law, tgt_law)))
    _report("A5 grid vs gaussian oracle", worst <= 1e-3, f"max |dKL| = {worst:.3e} <= 1e-3")


def test_a6_weak_convexity_properties():
    hub = lk.huber(1.0)
    lo, hi, n = lk.default_grid(hub)
    tgt = lk.target_density_grid(hub, lo, hi, n)
    p0 = lk.discretize_gaussian(0.0, 4.0, lo, hi, n)
    c1 = lk.w2_grid_1d(p0, tgt)
    c2 = math.sqrt(lk.second_moment_grid(tgt))
    kl0 = lk.kl_grid(p0, tgt)

    # (i) strict KL decrease for 500 steps at h = 0.01
    p = p0
    kls = [kl0]
    cap = 4.0 * (c1 * c1 + c2 * c2)
    sm_ok = lk.second_moment_grid(p) <= cap
    for _ in range(500):
        p = lk.ula_step_grid(p, hub, 0.01)
        kls.append(lk.kl_grid(p, tgt))
        sm_ok = sm_ok and lk.second_moment_grid(p) <= cap
    diffs = np.diff(kls)
    _report(
        "A6(i) strict KL decrease",
        bool(np.all(diffs < 0)),
        f"max step change {diffs.max():.3e} < 0 over 500 steps",
    )
    # (ii) weak-case second-moment bound with on-grid C1, C2
    _report("A6(ii) weak second-moment bound", sm_ok, f"cap 4(C1^2+C2^2) = {cap:.3f}")

    # (iii) planned weak run with grid-estimated h' and kl0
    h_prime = lk.estimate_h_prime(hub, c1, lo, hi, n)
    plan = lk.plan_weak(lk.WeakPlanInputs(c1, c2, h_prime, kl0), hub.L, 1, 0.2)
    p = p0
    for _ in range(min(plan.k, 100_000)):
        p = lk.ula_step_grid(p, hub, plan.h)
    final = lk.kl_grid(p, tgt)
    _report(
        "A6(iii) weak plan reaches target",
        final <= 0.2,
        f"final KL {final:.4f} <= 0.2 after {min(plan.k, 100_000)} steps (h' est {h_prime:.3g})",
    )


def test_a7_inequality_suites():
    rng = np.random.default_rng(20240807)

    def rand_spd(d):
        w = rng.uniform(0.3, 3.0, size=d)
        if d == 1:
            return np.array([[w[0]]])
        q, _ = np.linalg.qr(rng.normal(size=(d, d)))
        return (q * w) @ q.T

    def rand_law(d):
        return lk.GaussianLaw(rng.normal(0.0, 1.0, size=d), rand_spd(d))

    margins = {"pinsker": math.inf, "talagrand": math.inf, "log_sobolev": math.inf, "weak": math.inf}
    for _ in range(100):
        p = lk.gaussian_1d(rng.normal(0, 2), rng.uniform(0.3, 4.0))
        q = lk.gaussian_1d(rng.normal(0, 2), rng.uniform(0.3, 4.0))
        margins["pinsker"] = min(
            margins["pinsker"], math.sqrt(lk.kl_gaussian(p, q) / 2.0) - lk.tv_gaussian_1d(p, q)
        )
    for _ in range(100):
        d = int(rng.integers(1, 4))
        A = rand_spd(d)
        m = float(np.linalg.eigvalsh(A)[0])
        p = rand_law(d)
        tgt = lk.target_law(A)
        kl = lk.kl_gaussian(p, tgt)
        margins["talagrand"] = min(
            margins["talagrand"], (2.0 / m) * kl - lk.w2_gaussian(p, tgt) ** 2
        )
        margins["log_sobolev"] = min(
            margins["log_sobolev"], lk.fisher_info_relative(p, A) / (2.0 * m) - kl
        )
        margins["weak"] = min(
            margins["weak"],
            math.sqrt(lk.fisher_info_relative(p, A)) * lk.w2_gaussian(p, tgt) - kl,
        )

    dis = math.inf
    delta = 1e-5
    for _ in range(20):
        d = int(rng.integers(1, 4))
        A = np.diag(rng.uniform(0.3, 3.0, size=d))
        init = lk.GaussianLaw(rng.uniform(-2, 2, size=d), np.diag(rng.uniform(0.4, 3.0, size=d)))
        t = float(rng.uniform(0.05, 1.0))
        tgt = lk.target_law(A)
        dkl = (
            lk.kl_gaussian(lk.exact_flow_law(A, init, t + delta), tgt)
            - lk.kl_gaussian(lk.exact_flow_law(A, init, t - delta), tgt)
        ) / (2.0 * delta)
        fisher = lk.fisher_info_relative(lk.exact_flow_law(A, init, t), A)
        dis = min(dis, 1e-3 - abs(dkl + fisher) / fisher)

    for name, label in [
        ("pinsker", "A7 Pinsker tv <= sqrt(kl/2)"),
        ("talagrand", "A7 Talagrand-type w2^2 <= 2kl/m"),
        ("log_sobolev", "A7 log-Sobolev-type kl <= fisher/2m"),
        ("weak", "A7 weak bound kl <= sqrt(fisher) w2"),
    ]:
        _report(label, margins[name] >= -1e-9, f"min margin {margins[name]:.3e}")
    _report("A7 dissipation identity", dis >= -1e-9, f"min relative margin {dis:.3e}")


def test_a8_planner_regression():
    plan = lk.plan_strong(1, 2, 2, 0.1)
    ok_h = abs(plan.h - 0.1 / 128.0) <= 1e-12
    ok_k = plan.k == 4722
    weak = lk.plan_weak(lk.WeakPlanInputs(1.0, 1.0, math.inf, math.e), 1, 1, 0.1)
    ok_wh = abs(weak.h - 0.1**2 / 48.0) <= 1e-12
    ok_wk = weak.k == 105600
    ok_init = lk.kl_init_bound(1, 2, 3) == 6.0
    ok_disc = abs(lk.discretization_error_bound(1, 0.01, 1, 4) - 0.24) <= 1e-12
    _report(
        "A8 planner regression",
        ok_h and ok_k and ok_wh and ok_wk and ok_init and ok_disc,
        f"strong=({plan.h!r},{plan.k}) weak=({weak.h!r},{weak.k}) "
        f"kl_init={lk.kl_init_bound(1, 2, 3)} disc={lk.discretization_error_bound(1, 0.01, 1, 4)!r}",
    )
