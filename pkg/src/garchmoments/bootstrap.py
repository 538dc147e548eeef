"""Fixed-design residual bootstrap: joint draws and the moment-existence test.

Both schemes resample first-step residuals with replacement and multiply them
against the *fitted* volatilities of the original data (never re-filtering
the bootstrap observations recursively):

* joint draws: eps*_t = sigma_t(theta_hat) eta*_t, re-estimate, and record
  (theta*, mu*) per replicate to approximate the joint law of the estimators;
* moment test: eps*_t = sigma_t(theta_hat_c) eta*_t with the constrained
  estimator imposing the null, re-estimate *unconstrained*, and compare
  T* - T_c against T - 1.

Each replicate owns a deterministic random stream derived from (seed,
replicate index), so results do not depend on the execution schedule.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from joblib import Parallel, delayed

from .estimation import (
    EPS_CONSTRAINT,
    FitResult,
    OptimOptions,
    _fit_core,
    fit,
    fit_constrained,
)
from .exceptions import ConvergenceError, ParameterError
from .models import ModelSpec, estimate_moments, validate_series
from .spectral import SpectralMode, tau

_FAILURE_WARN_FRACTION = 0.01


class Direction(str, Enum):
    """Null hypothesis direction: UPPER tests T <= 1, LOWER tests T >= 1."""

    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class BootstrapConfig:
    B: int
    seed: int
    direction: Direction = Direction.UPPER
    resample_standardize: bool = False

    def __post_init__(self):
        if self.B < 1:
            raise ParameterError("B must be >= 1")
        object.__setattr__(self, "direction", Direction(self.direction))


@dataclass(frozen=True, eq=False)
class JointBootstrapDraws:
    """Replicate-level estimates from the joint bootstrap (Algorithm 1 style)."""

    theta_draws: np.ndarray  # (B_effective, r)
    mu_draws: np.ndarray  # (B_effective, dim mu)
    failures: int

    @property
    def theta_std(self) -> np.ndarray:
        return self.theta_draws.std(axis=0, ddof=1)

    @property
    def mu_std(self) -> np.ndarray:
        return self.mu_draws.std(axis=0, ddof=1)


@dataclass(frozen=True, eq=False)
class MomentTestResult:
    """Bootstrap moment-existence test outcome for one half-order m."""

    m: int
    T_hat: float
    T_hat_c: float
    bootstrap_stats: np.ndarray  # T*_b - T_c per successful replicate
    p_value: float
    B_effective: int
    mode: SpectralMode
    direction: Direction
    fit_unconstrained: FitResult | None = None
    fit_constrained: FitResult | None = None


def rng_stream(seed: int, replicate_index: int) -> np.random.Generator:
    """Deterministic, schedule-independent stream for one replicate.

    Streams are derived as SeedSequence(seed, spawn_key=(index,)), so the
    same (seed, index) pair reproduces identical draws regardless of how
    replicates are distributed over workers.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate_index,)))


def _resampling_pool(residuals: np.ndarray, standardize: bool) -> np.ndarray:
    if not standardize:
        return residuals
    centered = residuals - residuals.mean()
    scale = np.sqrt(np.mean(centered**2))
    if scale <= 0:
        return residuals - residuals.mean()
    return centered / scale


def _joint_replicate(b, spec, series, sigma_design, pool, start_theta, opts, seed, m):
    """One Algorithm-1 replicate: resample, rebuild eps*, refit, moments."""
    rng = rng_stream(seed, b)
    idx = rng.integers(0, pool.shape[0], size=series.shape[0])
    eta_star = pool[idx]
    eps_star = sigma_design * eta_star
    try:
        refit = _fit_core(spec, series, eps_star, opts, start_theta=start_theta)
    except Exception:
        return None
    if not refit.converged:
        return None
    mu_star = estimate_moments(refit.residuals, spec, m)
    return refit.theta_hat.to_array(), mu_star.mu


def _test_replicate(b, spec, series, sigma_design, pool, start_theta, opts, seed, m, mode):
    """One Algorithm-2 replicate: returns the bootstrap statistic T*_b."""
    rng = rng_stream(seed, b)
    idx = rng.integers(0, pool.shape[0], size=series.shape[0])
    eps_star = sigma_design * pool[idx]
    try:
        refit = _fit_core(spec, series, eps_star, opts, start_theta=start_theta)
    except Exception:
        return None
    if not refit.converged:
        return None
    mu_star = estimate_moments(refit.residuals, spec, m)
    return tau(spec, refit.theta_hat, mu_star, m, mode)


def _run_replicates(worker, B, n_jobs):
    if n_jobs == 1:
        return [worker(b) for b in range(B)]
    return Parallel(n_jobs=n_jobs, prefer="processes")(delayed(worker)(b) for b in range(B))


def bootstrap_joint(
    spec: ModelSpec,
    fit_result: FitResult,
    series,
    m: int,
    cfg: BootstrapConfig,
    opts: OptimOptions | None = None,
    n_jobs: int = 1,
) -> JointBootstrapDraws:
    """Joint draws of (theta*, mu*) under the fixed design sigma_t(theta_hat).

    Replicate failures (non-converged refits) are dropped and counted; a
    warning is emitted when they exceed 1% of B, and an error raised if all
    replicates fail.
    """
    if not fit_result.converged:
        raise ParameterError("bootstrap requires a converged first-step fit")
    opts = opts or OptimOptions()
    eps = validate_series(series)
    sigma_design = fit_result.vol.sigma
    pool = _resampling_pool(fit_result.residuals, cfg.resample_standardize)
    start = fit_result.theta_hat

    def worker(b):
        return _joint_replicate(b, spec, eps, sigma_design, pool, start, opts, cfg.seed, m)

    results = _run_replicates(worker, cfg.B, n_jobs)
    kept = [r for r in results if r is not None]
    failures = cfg.B - len(kept)
    if not kept:
        raise ConvergenceError("all bootstrap replicates failed to converge")
    _warn_failures(failures, cfg.B)
    theta_draws = np.vstack([t for t, _ in kept])
    mu_draws = np.vstack([mu for _, mu in kept])
    return JointBootstrapDraws(theta_draws=theta_draws, mu_draws=mu_draws, failures=failures)


def p_value(T_hat: float, T_hat_c: float, bootstrap_stats, direction: Direction) -> float:
    """Fraction of replicates with T_hat - 1 <= (T*_b - T_c) (UPPER direction).

    The LOWER direction reverses the inequality.
    """
    stats = np.asarray(bootstrap_stats, dtype=float).reshape(-1)
    if stats.size == 0:
        raise ParameterError("bootstrap statistics must be nonempty")
    observed = T_hat - 1.0
    if Direction(direction) is Direction.UPPER:
        return float(np.mean(observed <= stats))
    return float(np.mean(observed >= stats))


def bootstrap_test(
    spec: ModelSpec,
    series,
    m: int,
    cfg: BootstrapConfig,
    opts: OptimOptions | None = None,
    mode: SpectralMode = SpectralMode.RADIUS,
    n_jobs: int = 1,
    fit_result: FitResult | None = None,
) -> MomentTestResult:
    """Bootstrap test for the existence of the 2m-th moment.

    Pipeline: unconstrained fit -> residual moments and T_hat -> constrained
    fit imposing the null -> B fixed-design replicates, each re-estimated
    unconstrained, giving T*_b.  The p-value compares T_hat - 1 against
    T*_b - T_c with the direction-dependent inequality; rejection at a given
    nominal level is the caller's decision.
    """
    opts = opts or OptimOptions()
    eps = validate_series(series)
    base = fit_result if fit_result is not None else fit(spec, eps, opts)
    if not base.converged:
        raise ConvergenceError("unconstrained fit did not converge")
    mu_hat = estimate_moments(base.residuals, spec, m)
    T_hat = tau(spec, base.theta_hat, mu_hat, m, mode)

    upper = cfg.direction is Direction.UPPER
    constrained = fit_constrained(
        spec, eps, mu_hat, m, opts, upper=upper, mode=mode, unconstrained=base
    )
    T_hat_c = constrained.tau_at_solution
    if upper and T_hat_c > 1.0 + EPS_CONSTRAINT:
        raise ConvergenceError(f"constrained statistic {T_hat_c} violates the null by > eps_c")
    if not upper and T_hat_c < 1.0 - EPS_CONSTRAINT:
        raise ConvergenceError(f"constrained statistic {T_hat_c} violates the null by > eps_c")

    sigma_design = constrained.vol.sigma
    pool = _resampling_pool(base.residuals, cfg.resample_standardize)
    start = constrained.theta_hat

    def worker(b):
        return _test_replicate(
            b, spec, eps, sigma_design, pool, start, opts, cfg.seed, m, mode
        )

    results = _run_replicates(worker, cfg.B, n_jobs)
    kept = np.array([r for r in results if r is not None], dtype=float)
    failures = cfg.B - kept.shape[0]
    if kept.size == 0:
        raise ConvergenceError("all bootstrap replicates failed to converge")
    _warn_failures(failures, cfg.B)

    stats = kept - T_hat_c
    pv = p_value(T_hat, T_hat_c, stats, cfg.direction)
    return MomentTestResult(
        m=m,
        T_hat=T_hat,
        T_hat_c=T_hat_c,
        bootstrap_stats=stats,
        p_value=pv,
        B_effective=int(kept.shape[0]),
        mode=mode,
        direction=cfg.direction,
        fit_unconstrained=base,
        fit_constrained=constrained,
    )


def _warn_failures(failures, B):
    if failures > _FAILURE_WARN_FRACTION * B:
        warnings.warn(
            f"{failures}/{B} bootstrap replicates failed to converge and were dropped",
            RuntimeWarning,
            stacklevel=3,
        )
