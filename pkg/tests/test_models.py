import numpy as np
import pytest
from numpy.testing import assert_allclose

from garchmoments import (
    Family,
    ModelSpec,
    Params,
    estimate_moments,
    filter_volatility,
    gaussian_moments,
    h_eval,
    residuals,
    scale_params,
    simulate,
)
from garchmoments.exceptions import ParameterError, PathOverflowError
from garchmoments.models import presample_state


def test_spec_validation():
    with pytest.raises(ParameterError):
        ModelSpec(Family.ARCH, q=1, p=1)
    with pytest.raises(ParameterError):
        ModelSpec(Family.GARCH, q=0, p=1)
    with pytest.raises(ParameterError):
        ModelSpec(Family.GARCH, q=1, p=0)
    with pytest.raises(ParameterError):
        ModelSpec(Family.APGARCH, q=1, p=1)  # missing delta/gamma
    with pytest.raises(ParameterError):
        ModelSpec(Family.GARCH, q=1, p=1, delta=1.5)
    spec = ModelSpec(Family.TGARCH, q=2, p=1)
    assert spec.n_alpha == 4 and spec.n_params == 6 and spec.a_dim == 5


def test_params_validation(garch11_spec):
    with pytest.raises(ParameterError):
        Params(-1.0, [0.1], [0.5]).validate(garch11_spec)
    with pytest.raises(ParameterError):
        Params(1.0, [-0.1], [0.5]).validate(garch11_spec)
    with pytest.raises(ParameterError):
        Params(1.0, [0.1, 0.2], [0.5]).validate(garch11_spec)
    theta = Params.from_array([1.0, 0.1, 0.5], garch11_spec)
    assert_allclose(theta.to_array(), [1.0, 0.1, 0.5])


# ---------------------------------------------------------------------------
# simulate


def test_simulate_degenerate_is_scaled_noise(garch11_spec):
    rng = np.random.default_rng(0)
    eta = rng.standard_normal(300)
    eps = simulate(garch11_spec, Params(4.0, [0.0], [0.0]), eta, burn_in=100)
    assert_allclose(eps, 2.0 * eta[100:], rtol=1e-15)


def test_simulate_arch1_hand_unrolled():
    # sigma1^2 = unconditional = 1/(1-0.5) = 2; eps1 = sqrt(2)
    # sigma2^2 = 1 + 0.5*2 = 2; eps2 = -sqrt(2); sigma3^2 = 2; eps3 = 2 sqrt(2)
    spec = ModelSpec(Family.ARCH, q=1)
    eps = simulate(spec, Params(1.0, [0.5], []), np.array([1.0, -1.0, 2.0]), burn_in=0)
    root2 = np.sqrt(2.0)
    assert_allclose(eps, [root2, -root2, 2 * root2], rtol=1e-14)


def test_simulate_path_overflow():
    spec = ModelSpec(Family.ARCH, q=1)
    with pytest.raises(PathOverflowError, match="path overflow"):
        simulate(spec, Params(1.0, [1e160], []), np.full(8, 3.0), burn_in=0)


def test_simulate_argument_checks(garch11_spec):
    theta = Params(0.1, [0.05], [0.9])
    with pytest.raises(ParameterError):
        simulate(garch11_spec, theta, np.ones(10), burn_in=-1)
    with pytest.raises(ParameterError):
        simulate(garch11_spec, theta, np.ones(10), burn_in=10)


def test_simulate_two_sided_families_run():
    rng = np.random.default_rng(5)
    eta = rng.standard_normal(400)
    for spec, theta in [
        (ModelSpec(Family.TGARCH, q=1, p=1), Params(0.1, [0.05, 0.09], [0.8])),
        (ModelSpec(Family.GJRGARCH, q=1, p=1), Params(0.1, [0.03, 0.09], [0.8])),
        (ModelSpec(Family.APGARCH, q=1, p=1, delta=1.5, gamma=0.2), Params(0.1, [0.06], [0.8])),
    ]:
        eps = simulate(spec, theta, eta, burn_in=200)
        assert eps.shape == (200,) and np.all(np.isfinite(eps))


# ---------------------------------------------------------------------------
# filter_volatility


def test_filter_no_feedback(garch11_spec):
    series = np.array([1.0, -2.0, 0.5])
    vol = filter_volatility(garch11_spec, Params(3.0, [0.0], [0.0]), series)
    assert_allclose(vol.sigma2, 3.0)


def test_filter_garch11_hand_unrolled(garch11_spec):
    # presample obs^2 = mean(4, 0) = 2; presample state is its fixed point
    # (1 + 0.2*2)/(1 - 0.5) = 2.8, so sigma1^2 = 1 + 0.2*2 + 0.5*2.8 = 2.8
    # and sigma2^2 = 1 + 0.2*4 + 0.5*2.8 = 3.2
    vol = filter_volatility(garch11_spec, Params(1.0, [0.2], [0.5]), np.array([2.0, 0.0]))
    assert vol.presample_value == 2.0
    assert_allclose(vol.sigma2, [2.8, 3.2], rtol=1e-14)


def test_presample_state_is_recursion_fixed_point(garch11_spec):
    theta = Params(1.0, [0.2], [0.5])
    pre = presample_state(garch11_spec, theta, 2.0)
    assert_allclose(pre, theta.omega + 0.2 * 2.0 + 0.5 * pre, rtol=1e-15)


def test_filter_rejects_bad_theta(garch11_spec):
    with pytest.raises(ParameterError):
        filter_volatility(garch11_spec, Params(1.0, [-0.2], [0.5]), np.ones(5))


def test_filter_scaling_stability():
    rng = np.random.default_rng(42)
    series = rng.standard_normal(200)
    for spec, theta in [
        (ModelSpec(Family.GARCH, q=1, p=1), Params(0.3, [0.1], [0.7])),
        (ModelSpec(Family.GARCH, q=2, p=2), Params(0.2, [0.1, 0.05], [0.4, 0.2])),
        (ModelSpec(Family.ARCH, q=2), Params(0.5, [0.3, 0.2], [])),
        (ModelSpec(Family.TGARCH, q=1, p=1), Params(0.3, [0.1, 0.2], [0.6])),
        (ModelSpec(Family.APGARCH, q=1, p=1, delta=1.7, gamma=-0.3), Params(0.3, [0.1], [0.6])),
        (ModelSpec(Family.GJRGARCH, q=1, p=1), Params(0.3, [0.1, 0.2], [0.6])),
    ]:
        for lam in (2.0, 0.37, 5.5):
            scaled = filter_volatility(spec, scale_params(spec, theta, lam), series)
            base = filter_volatility(spec, theta, series)
            assert_allclose(scaled.sigma2, lam**2 * base.sigma2, rtol=1e-12)


def test_scale_params_identity_and_example(garch11_spec):
    theta = Params(1.0, [0.1], [0.8])
    same = scale_params(garch11_spec, theta, 1.0)
    assert_allclose(same.to_array(), theta.to_array())
    doubled = scale_params(garch11_spec, theta, 2.0)
    assert_allclose(doubled.to_array(), [4.0, 0.4, 0.8])


def test_truncation_decay_garch11(garch11_spec):
    # exact filter started at the true sigma0^2 versus the truncated filter:
    # the gap contracts by exactly beta each step until it underflows
    rng = np.random.default_rng(9)
    theta = Params(0.1, [0.08], [0.9])
    eta = rng.standard_normal(700)
    eps = simulate(garch11_spec, theta, eta, burn_in=500)
    n = eps.shape[0]
    true_sig2 = np.empty(n)
    # oracle: run the recursion from the simulation's own state by recovering
    # sigma_t^2 = eps_t^2 / eta_t^2 of the generating draw
    gen_eta = eta[500:]
    true_sig2 = (eps / gen_eta) ** 2
    filt = filter_volatility(garch11_spec, theta, eps).sigma2
    gaps = np.abs(filt - true_sig2)
    live = gaps > 1e-10
    ratios = gaps[1:][live[1:]] / gaps[:-1][live[1:]]
    assert np.all(ratios <= theta.beta[0] + 1e-6)


def test_truncation_decay_p2():
    # with two beta lags the decay rate approaches the largest root of the
    # beta lag polynomial
    spec = ModelSpec(Family.GARCH, q=1, p=2)
    theta = Params(0.1, [0.05], [0.5, 0.3])
    rng = np.random.default_rng(10)
    eta = rng.standard_normal(800)
    eps = simulate(spec, theta, eta, burn_in=500)
    gen_eta = eta[500:]
    true_sig2 = (eps / gen_eta) ** 2
    filt = filter_volatility(spec, theta, eps).sigma2
    gaps = np.abs(filt - true_sig2)
    root = np.max(np.abs(np.roots([1.0, -0.5, -0.3])))
    rate = (gaps[40] / gaps[10]) ** (1.0 / 30.0)
    assert rate <= root + 1e-6


# ---------------------------------------------------------------------------
# residuals


def test_residuals_trivial(garch11_spec):
    series = np.array([2.0, -3.0])
    vol = filter_volatility(garch11_spec, Params(1.0, [0.0], [0.0]), series)
    eta = residuals(series, vol)
    assert_allclose(eta, series / 1.0)
    from garchmoments.models import VolatilityPath

    assert_allclose(residuals(series, VolatilityPath(np.array([4.0, 9.0]), 1.0)), [1.0, -1.0])


def test_residuals_roundtrip(garch11_spec):
    rng = np.random.default_rng(11)
    theta = Params(0.1, [0.1], [0.85])
    eta = rng.standard_normal(1500)
    eps = simulate(garch11_spec, theta, eta, burn_in=500)
    vol = filter_volatility(garch11_spec, theta, eps)
    recovered = residuals(eps, vol)
    # truncation decays geometrically, so late residuals match the draws
    assert_allclose(recovered[500:], eta[1000:], rtol=1e-6)


# ---------------------------------------------------------------------------
# h_eval / estimate_moments


def test_h_eval_values():
    garch = ModelSpec(Family.GARCH, q=1, p=1)
    assert_allclose(h_eval(garch, 3, 2.0), [4.0, 16.0, 64.0])
    assert_allclose(h_eval(garch, 4, 0.0), np.zeros(4))
    tgarch = ModelSpec(Family.TGARCH, q=1, p=1)
    assert_allclose(h_eval(tgarch, 2, -3.0), [0.0, 0.0, 3.0, 9.0])
    assert_allclose(h_eval(tgarch, 2, 3.0), [3.0, 9.0, 0.0, 0.0])
    gjr = ModelSpec(Family.GJRGARCH, q=1, p=1)
    assert_allclose(h_eval(gjr, 2, -2.0), [0.0, 0.0, 4.0, 16.0])
    ap = ModelSpec(Family.APGARCH, q=1, p=1, delta=2.0, gamma=0.5)
    assert_allclose(h_eval(ap, 2, 3.0), [9.0, 81.0, 0.0, 0.0])
    with pytest.raises(ParameterError):
        h_eval(garch, 0, 1.0)


def test_estimate_moments_hand_values(garch11_spec):
    mu = estimate_moments(np.ones(7), garch11_spec, 2)
    assert_allclose(mu.mu, [1.0, 1.0])
    mu = estimate_moments(np.array([1.0, -1.0, 2.0, -2.0]), garch11_spec, 2)
    assert_allclose(mu.mu, [2.5, 8.5])


def test_estimate_moments_matches_independent_power_means(garch11_spec):
    rng = np.random.default_rng(12)
    x = rng.standard_normal(500)
    mu = estimate_moments(x, garch11_spec, 4)
    for k in range(1, 5):
        oracle = sum(v ** (2 * k) for v in x) / x.shape[0]
        assert_allclose(mu.mu[k - 1], oracle, rtol=1e-12)


def test_estimate_moments_gaussian_large_sample(garch11_spec):
    rng = np.random.default_rng(13)
    x = rng.standard_normal(2_000_000)
    mu = estimate_moments(x, garch11_spec, 5)
    expected = gaussian_moments(5).mu  # (1, 3, 15, 105, 945)
    assert_allclose(expected, [1.0, 3.0, 15.0, 105.0, 945.0])
    for value, target, rtol in zip(mu.mu, expected, (0.005, 0.01, 0.02, 0.05, 0.10)):
        assert_allclose(value, target, rtol=rtol)


def test_estimate_moments_two_sided():
    tgarch = ModelSpec(Family.TGARCH, q=1, p=1)
    x = np.array([1.0, -2.0])
    mu = estimate_moments(x, tgarch, 2)
    assert_allclose(mu.mu, [0.5, 0.5, 1.0, 2.0])


def test_estimate_moments_nonfinite_raises(garch11_spec):
    with pytest.raises(ParameterError):
        estimate_moments(np.array([1.0, np.inf]), garch11_spec, 2)
