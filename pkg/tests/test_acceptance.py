"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Criteria 5-8 are statistical and run at desk scale with fixed seeds; criterion
7 is the long Monte Carlo suite (marked slow, still part of the default run).
"""

import numpy as np
import pytest
from joblib import Parallel, delayed

import garchmoments as gm
from garchmoments import (
    BootstrapConfig,
    ExperimentConfig,
    Family,
    ModelSpec,
    MomentVector,
    Params,
    bootstrap_joint,
    estimate_moments,
    fit,
    gaussian_moments,
    run_experiment,
    sigma_blocks,
    simulate,
    solve_boundary_beta,
    tau,
)
from garchmoments.cli import main
from garchmoments.io import RunReport
from garchmoments.spectral import (
    build_A,
    closed_form_garch11,
    closed_form_garch11_gradient,
    coefficient_matrices,
    kron_power,
)

N_JOBS = 2


def _report(number, message):
    print(f"ACCEPTANCE {number}: PASS - {message}")


# ---------------------------------------------------------------------------


def test_criterion_1_proposition_identity():
    specs = [
        ModelSpec(Family.ARCH, q=2),
        ModelSpec(Family.GARCH, q=1, p=1),
        ModelSpec(Family.GARCH, q=2, p=1),
        ModelSpec(Family.GARCH, q=2, p=2),
    ]
    rng = np.random.default_rng(101)
    worst = 0.0
    for spec in specs:
        for _ in range(50):
            theta = Params(
                rng.uniform(0.01, 1.0),
                rng.uniform(0.0, 0.3, spec.n_alpha),
                rng.uniform(0.0, 0.6, spec.p) / max(spec.p, 1),
            )
            eta = rng.standard_normal()
            for m in (1, 2, 3):
                lhs = kron_power(build_A(spec, theta, eta), m)
                rhs = coefficient_matrices(spec, theta, m).evaluate(eta**2)
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    assert worst < 1e-12
    _report(1, f"Kronecker-power split identity, max abs deviation {worst:.2e} < 1e-12")


def test_criterion_2_closed_form_oracle():
    spec = ModelSpec(Family.GARCH, q=1, p=1)
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(100):
        alpha = rng.uniform(0.0, 0.4)
        beta = rng.uniform(0.0, 0.9)
        m = int(rng.integers(1, 6))
        mu = MomentVector(m, np.cumprod(rng.uniform(1.0, 3.0, m)))
        via_radius = tau(spec, Params(1.0, [alpha], [beta]), mu, m)
        worst = max(worst, abs(via_radius - closed_form_garch11(alpha, beta, mu, m)))
    assert worst < 1e-10
    # m = 2 reduces to the quartic-moment condition exactly
    alpha, beta = 0.13, 0.78
    mu = MomentVector(2, [1.1, 3.4])
    direct = beta**2 + 2 * alpha * beta * mu.mu[0] + alpha**2 * mu.mu[1]
    assert closed_form_garch11(alpha, beta, mu, 2) == direct
    _report(2, f"closed form vs spectral radius, max abs deviation {worst:.2e} < 1e-10")


def test_criterion_3_boundary_design_constants():
    spec = ModelSpec(Family.GARCH, q=2, p=1)
    mu = gaussian_moments(5)
    beta = solve_boundary_beta(spec, Params(0.08, [0.05, 0.10], [0.0]), mu, 3)
    ladder = [tau(spec, Params(0.08, [0.05, 0.10], [beta]), mu, m) for m in range(1, 6)]
    targets = (0.96, 0.95, 1.00, 1.11, 1.32)
    for value, target in zip(ladder, targets):
        assert abs(value - target) < 0.005
    _report(
        3,
        "boundary beta {:.4f}; tau ladder {} within 0.005 of {}".format(
            beta, np.round(ladder, 4).tolist(), targets
        ),
    )


def test_criterion_4_gradient_checks():
    # quasi-likelihood score against central differences
    spec = ModelSpec(Family.GARCH, q=2, p=1)
    rng = np.random.default_rng(104)
    series = simulate(
        spec, Params(0.08, [0.05, 0.10], [0.80]), rng.standard_normal(1500), burn_in=500
    )
    worst_score = 0.0
    for _ in range(20):
        theta = Params(
            rng.uniform(0.02, 0.8), rng.uniform(0.01, 0.2, 2), rng.uniform(0.2, 0.75, 1)
        )
        g = gm.qll_score(spec, theta, series)
        x = theta.to_array()
        for i in range(x.shape[0]):
            h = 1e-6 * (1.0 + abs(x[i]))
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            fd = (
                gm.negative_qll(spec, Params.from_array(xp, spec), series)
                - gm.negative_qll(spec, Params.from_array(xm, spec), series)
            ) / (2 * h)
            worst_score = max(worst_score, abs(g[i] - fd) / (1.0 + abs(fd)))
    assert worst_score < 1e-5

    # closed-form tau gradient against central differences
    worst_tau = 0.0
    for _ in range(20):
        alpha = rng.uniform(0.02, 0.4)
        beta = rng.uniform(0.1, 0.9)
        m = int(rng.integers(1, 5))
        mu = MomentVector(m, np.cumprod(rng.uniform(1.0, 3.0, m)))
        d_alpha, d_beta, d_mu = closed_form_garch11_gradient(alpha, beta, mu, m)
        h = 1e-7
        fd_a = (
            closed_form_garch11(alpha + h, beta, mu, m)
            - closed_form_garch11(alpha - h, beta, mu, m)
        ) / (2 * h)
        fd_b = (
            closed_form_garch11(alpha, beta + h, mu, m)
            - closed_form_garch11(alpha, beta - h, mu, m)
        ) / (2 * h)
        worst_tau = max(
            worst_tau, abs(d_alpha - fd_a) / (1 + abs(fd_a)), abs(d_beta - fd_b) / (1 + abs(fd_b))
        )
        for k in range(m):
            up, down = mu.mu.copy(), mu.mu.copy()
            up[k] += h
            down[k] -= h
            fd_m = (
                closed_form_garch11(alpha, beta, MomentVector(m, up), m)
                - closed_form_garch11(alpha, beta, MomentVector(m, down), m)
            ) / (2 * h)
            worst_tau = max(worst_tau, abs(d_mu[k] - fd_m) / (1 + abs(fd_m)))
    assert worst_tau < 1e-6
    _report(
        4,
        f"score FD error {worst_score:.2e} < 1e-5; tau gradient FD error {worst_tau:.2e} < 1e-6",
    )


def _one_consistency_fit(child):
    spec = ModelSpec(Family.GARCH, q=1, p=1)
    theta0 = Params(0.08, [0.05], [0.90])
    rng = np.random.default_rng(child)
    eps = simulate(spec, theta0, rng.standard_normal(10500), burn_in=500)
    res = fit(spec, eps)
    if not res.converged:
        return None
    interior = res.theta_hat.alpha[0] > 1e-7 and res.theta_hat.beta[0] > 1e-7
    resid_gap = abs(float(np.mean(res.residuals**2)) - 1.0)
    sd = np.sqrt(np.diag(sigma_blocks(res, spec, 1).Sigma)[:3] / eps.shape[0])
    return res.theta_hat.to_array(), sd, interior, resid_gap


@pytest.mark.slow
def test_criterion_5_estimator_consistency():
    theta0 = np.array([0.08, 0.05, 0.90])
    seeds = np.random.SeedSequence(105).spawn(200)
    rows = Parallel(n_jobs=N_JOBS)(delayed(_one_consistency_fit)(s) for s in seeds)
    rows = [r for r in rows if r is not None]
    assert len(rows) >= 195  # essentially every fit must converge
    errors = np.abs(np.vstack([r[0] for r in rows]) - theta0)
    sds = np.vstack([r[1] for r in rows])
    med_err = np.median(errors, axis=0)
    med_sd = np.median(sds, axis=0)
    assert np.all(med_err < 3.0 * med_sd)
    for _, _, interior, resid_gap in rows:
        if interior:
            assert resid_gap < 1e-6
    _report(
        5,
        "median |theta_hat - theta| {} < 3 x asymptotic sd {} over {} seeds".format(
            np.round(med_err, 4).tolist(), np.round(med_sd, 4).tolist(), len(rows)
        ),
    )


def _one_bootstrap_vs_asymptotics(index, child):
    spec = ModelSpec(Family.GARCH, q=1, p=1)
    theta0 = Params(0.08, [0.05], [0.90])
    rng = np.random.default_rng(child)
    eps = simulate(spec, theta0, rng.standard_normal(5500), burn_in=500)
    res = fit(spec, eps)
    if not res.converged:
        return False
    draws = bootstrap_joint(spec, res, eps, 2, BootstrapConfig(B=999, seed=60000 + index))
    asym = np.sqrt(np.diag(sigma_blocks(res, spec, 2).Sigma)[:3] / eps.shape[0])
    ratio = draws.theta_std / asym
    return bool(np.all(np.abs(ratio - 1.0) <= 0.20))


@pytest.mark.slow
def test_criterion_6_bootstrap_matches_asymptotics():
    seeds = np.random.SeedSequence(106).spawn(20)
    outcomes = Parallel(n_jobs=N_JOBS)(
        delayed(_one_bootstrap_vs_asymptotics)(i, s) for i, s in enumerate(seeds)
    )
    passed = sum(outcomes)
    assert passed >= 16
    _report(
        6,
        f"bootstrap sd within 20% of asymptotic sd on {passed}/20 datasets (need >= 16)",
    )


@pytest.mark.slow
def test_criterion_7_desk_scale_rejection_table():
    cfg = ExperimentConfig(
        spec=ModelSpec(Family.GARCH, q=2, p=1),
        omega=0.08,
        alpha=(0.05, 0.10),
        m_grid=(1, 2, 3, 5),
        n_grid=(1000,),
        S=200,
        B=199,
        boundary_m=3,
        master_seed=107,
    )
    table = run_experiment(cfg, n_jobs=N_JOBS)
    freq = {m: table.frequency(1000, m, 0.05) for m in cfg.m_grid}
    assert freq[1] <= 0.01
    assert freq[2] <= 0.01
    assert freq[3] <= 0.08
    assert freq[5] >= 0.25
    _report(
        7,
        "rejection at 5%: m1 {:.1%} <= 1%, m2 {:.1%} <= 1%, m3 {:.1%} <= 8%, m5 {:.1%} >= 25%".format(
            freq[1], freq[2], freq[3], freq[5]
        ),
    )


@pytest.mark.slow
def test_criterion_8_density_centering():
    cfg = ExperimentConfig(
        spec=ModelSpec(Family.GARCH, q=2, p=1),
        omega=0.08,
        alpha=(0.05, 0.10),
        m_grid=(1, 4),
        n_grid=(5000,),
        S=100,
        B=199,
        boundary_m=3,
        master_seed=108,
    )
    table = run_experiment(cfg, n_jobs=N_JOBS)
    targets = {1: -3.00, 4: 7.83}
    centers = {}
    for m, target in targets.items():
        cell = table.cells[(5000, m)]
        center = float(np.mean(cell.stat_samples()))
        centers[m] = center
        assert abs(center - target) <= 0.6
        boots = cell.boot_stats_first
        se = float(np.std(boots, ddof=1) / np.sqrt(boots.shape[0]))
        assert abs(float(np.mean(boots))) <= 3.0 * se
    _report(
        8,
        "sqrt(n)(T_hat - 1) centers m1 {:.2f} (target -3.00), m4 {:.2f} (target 7.83); "
        "bootstrap draws centered at zero".format(centers[1], centers[4]),
    )


def test_criterion_9_cli_determinism(tmp_path, capsys):
    data = tmp_path / "series.csv"
    rng = np.random.default_rng(109)
    spec = ModelSpec(Family.GARCH, q=2, p=1)
    eps = simulate(spec, Params(0.08, [0.05, 0.10], [0.80]), rng.standard_normal(1100), burn_in=500)
    np.savetxt(data, eps, fmt="%.17g")
    argv = [
        "test",
        "--data",
        str(data),
        "--q",
        "2",
        "--m",
        "1,2",
        "--B",
        "29",
        "--seed",
        "13",
        "--deterministic",
    ]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    assert main(argv + ["--threads", "2"]) == 0
    threaded = RunReport.parse(capsys.readouterr().out)
    assert threaded.tests == RunReport.parse(first).tests
    _report(9, "repeated CLI runs byte-identical; results invariant to --threads")


def test_criterion_10_full_scale_exclusions():
    # Full-scale replication (S = 2000, B = 9999 tables and the proprietary
    # index dataset) is excluded by design; the desk-scale rejection table
    # (criterion 7) and the point-estimate format checks stand in for it.
    import tests.test_spectral as spectral_tests

    assert hasattr(spectral_tests, "test_statistic_empirical_application_shape")
    _report(
        10,
        "full-scale tables excluded as gates; desk-scale table and format checks run instead",
    )
