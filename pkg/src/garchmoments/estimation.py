"""Gaussian quasi-maximum likelihood estimation for ARCH/GARCH models.

The criterion maximized is the average of
``l_t(theta) = -0.5 (eps_t / sigma_t(theta))^2 - log sigma_t(theta)``
with sigma filtered under truncated initial conditions.  Internally the series
is standardized by its sample second moment before optimizing, which makes the
optimizer's search box scale-equivariant; only the intercept carries data
units on the way back.

The unconstrained fit runs a quasi-Newton (L-BFGS-B) search on
(log omega, alpha, beta) with analytic gradients, jittered restarts and a
Nelder-Mead fallback.  The constrained fit imposes tau(theta, mu_hat) <= 1
(or >= 1) through an exterior quadratic penalty with an escalating weight
schedule, finished by a bisection that rescales the alpha block onto the
constraint boundary.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._recursions import garch_filter_grad
from .exceptions import (
    DegenerateSeriesError,
    InfeasibleConstraintError,
    ParameterError,
    SingularMatrixError,
)
from .models import (
    Family,
    ModelSpec,
    MomentVector,
    Params,
    VOL_FLOOR,
    VolatilityPath,
    filter_volatility,
    rescale_intercept,
    residuals as compute_residuals,
    scale_params,
    validate_series,
)
from .spectral import SpectralMode, closed_form_garch11_gradient, tau, tau_value_gradient

#: Tolerance on the active constraint at a constrained solution (D8).
EPS_CONSTRAINT = 1e-8

#: A fit is flagged converged when the projected gradient stays below this.
_CONVERGED_GRAD_TOL = 1e-6

# Search box in standardized units (sample second moment one).
_LOG_OMEGA_MIN = np.log(1e-8)
_LOG_OMEGA_MAX = np.log(1e6)
_AB_MAX = 0.999999
_SUM_BETA_PENALTY = 1e8

_ESTIMABLE = (Family.ARCH, Family.GARCH)


@dataclass(frozen=True)
class OptimOptions:
    """Optimizer controls for the (un)constrained quasi-likelihood fits."""

    max_iterations: int = 500
    tolerance_obj: float = 1e-14
    tolerance_param: float = 1e-10
    restarts: int = 3
    penalty_schedule: tuple = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6)
    #: theta-vector indices (>= 1, i.e. alpha/beta entries) pinned to zero.
    freeze_zero: tuple = ()

    def __post_init__(self):
        if self.tolerance_obj <= 0 or self.tolerance_param <= 0:
            raise ParameterError("tolerances must be positive")
        if 0 in self.freeze_zero:
            raise ParameterError("omega cannot be frozen at zero")


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a quasi-likelihood fit."""

    spec: ModelSpec
    theta_hat: Params
    loglik: float
    vol: VolatilityPath
    residuals: np.ndarray
    converged: bool
    iterations: int
    series: np.ndarray
    score_norm: float
    constrained: bool = False
    tau_at_solution: float | None = None


# ---------------------------------------------------------------------------
# Objective


def _presample_with_grad(spec, theta: Params, s2: float):
    """Fixed-point presample sigma^2 and its gradient w.r.t. theta."""
    sum_beta = float(np.sum(theta.beta))
    denom = 1.0 - sum_beta
    clamped = denom < 1e-6
    denom = max(denom, 1e-6)
    pre = (theta.omega + s2 * float(np.sum(theta.alpha))) / denom
    dpre = np.empty(spec.n_params)
    dpre[0] = 1.0 / denom
    dpre[1 : 1 + spec.q] = s2 / denom
    dpre[1 + spec.q :] = 0.0 if clamped else pre / denom
    return pre, dpre


def _qll_value_grad(spec, theta: Params, filter_series, numerators):
    """Mean of 0.5 y^2/sig2 + 0.5 log sig2 and its gradient w.r.t. theta.

    ``filter_series`` drives the volatility recursion; ``numerators`` supplies
    the squared observations in the quadratic term (they coincide except in
    the fixed-design bootstrap criterion).
    """
    s2 = float(np.mean(filter_series**2))
    pre_sig2, dpre = _presample_with_grad(spec, theta, s2)
    sig2, dsig2 = garch_filter_grad(
        filter_series,
        spec.q,
        spec.p,
        theta.omega,
        theta.alpha,
        theta.beta,
        s2,
        pre_sig2,
        dpre,
        VOL_FLOOR,
    )
    y2 = numerators * numerators
    n = filter_series.shape[0]
    val = float(np.mean(0.5 * y2 / sig2 + 0.5 * np.log(sig2)))
    w = (1.0 - y2 / sig2) / (2.0 * sig2)
    grad = dsig2.T @ w / n
    return val, grad, sig2


def negative_qll(spec: ModelSpec, theta: Params, series) -> float:
    """Negative average quasi-log-likelihood at theta (lower is better)."""
    _require_estimable(spec)
    theta.validate(spec)
    eps = validate_series(series)
    val, _, _ = _qll_value_grad(spec, theta, eps, eps)
    return val


def qll_score(spec: ModelSpec, theta: Params, series) -> np.ndarray:
    """Analytic gradient of :func:`negative_qll` w.r.t. (omega, alpha, beta)."""
    _require_estimable(spec)
    theta.validate(spec)
    eps = validate_series(series)
    _, grad, _ = _qll_value_grad(spec, theta, eps, eps)
    return grad


def _require_estimable(spec):
    if spec.family not in _ESTIMABLE:
        raise ParameterError(
            f"quasi-likelihood estimation supports ARCH/GARCH only, got {spec.family.value}"
        )


# ---------------------------------------------------------------------------
# Unconstrained optimizer core


def _default_start(spec) -> np.ndarray:
    """Standardized-unit starting values: omega 0.1, alpha 0.05/q, beta 0.8/p."""
    alpha = np.full(spec.q, 0.05 / spec.q)
    beta = np.full(spec.p, 0.80 / spec.p) if spec.p else np.empty(0)
    return np.concatenate(([0.1], alpha, beta))


def _jittered_start(spec, rng) -> np.ndarray:
    alpha = rng.uniform(0.01, 0.25, spec.q) / spec.q
    beta = rng.uniform(0.2, 0.9, spec.p) / max(spec.p, 1) if spec.p else np.empty(0)
    total = alpha.sum() + beta.sum()
    if total > 0.95:
        alpha *= 0.95 / total
        beta *= 0.95 / total
    omega = max(1.0 - alpha.sum() - beta.sum(), 1e-4)
    return np.concatenate(([omega], alpha, beta))


def _projected_grad_norm(x, g, lower, upper):
    pg = g.copy()
    at_lo = x <= lower + 1e-14
    at_hi = x >= upper - 1e-14
    pg[at_lo] = np.minimum(pg[at_lo], 0.0)
    pg[at_hi] = np.maximum(pg[at_hi], 0.0)
    return float(np.max(np.abs(pg))) if pg.size else 0.0


class _BoxProblem:
    """Quasi-likelihood in x = (log omega, alpha, beta) coordinates."""

    def __init__(self, spec, z, y, opts, penalty=None):
        self.spec = spec
        self.z = z
        self.y = y
        self.penalty = penalty  # callable theta -> (value, grad) or None
        r = spec.n_params
        self.free = np.array([i not in opts.freeze_zero for i in range(r)])
        lower = np.concatenate(([_LOG_OMEGA_MIN], np.zeros(r - 1)))
        upper = np.concatenate(([_LOG_OMEGA_MAX], np.full(r - 1, _AB_MAX)))
        self.lower, self.upper = lower[self.free], upper[self.free]

    def _expand(self, xfree):
        x = np.zeros(self.spec.n_params)  # frozen entries stay at zero
        x[self.free] = xfree
        return x

    def theta_of(self, xfree) -> Params:
        x = self._expand(xfree)
        return Params.from_array(np.concatenate(([np.exp(x[0])], x[1:])), self.spec)

    def xfree_of(self, theta: Params) -> np.ndarray:
        arr = theta.to_array()
        x = np.concatenate(([np.log(max(arr[0], 1e-300))], arr[1:]))
        return np.clip(x, *self._full_bounds())[self.free]

    def _full_bounds(self):
        r = self.spec.n_params
        return (
            np.concatenate(([_LOG_OMEGA_MIN], np.zeros(r - 1))),
            np.concatenate(([_LOG_OMEGA_MAX], np.full(r - 1, _AB_MAX))),
        )

    def value_grad(self, xfree):
        theta = self.theta_of(xfree)
        val, grad, _ = _qll_value_grad(self.spec, theta, self.z, self.y)
        grad = grad.copy()
        if self.spec.p >= 2:  # keep sum(beta) inside the stationarity margin
            excess = float(np.sum(theta.beta)) - _AB_MAX
            if excess > 0:
                val += _SUM_BETA_PENALTY * excess**2
                grad[1 + self.spec.n_alpha :] += 2.0 * _SUM_BETA_PENALTY * excess
        if self.penalty is not None:
            pv, pg = self.penalty(theta)
            val += pv
            grad += pg
        grad[0] *= theta.omega  # chain rule for the log transform
        return val, grad[self.free]


def _scaling_polish(problem, xfree):
    """Exact line optimization along the volatility-scaling direction.

    Replacing theta by its scaling-map image with lambda^2 = mean(y^2/sig2)
    minimizes the criterion along that direction in closed form and enforces
    the residual normalization mean(eta_hat^2) = 1 at interior optima.
    Entries frozen at zero are fixed points of the scaling map.
    """
    theta = problem.theta_of(xfree)
    _, _, sig2 = _qll_value_grad(problem.spec, theta, problem.z, problem.y)
    lam2 = float(np.mean(problem.y**2 / sig2))
    if not np.isfinite(lam2) or lam2 <= 0:
        return xfree
    theta2 = scale_params(problem.spec, theta, np.sqrt(lam2))
    return problem.xfree_of(theta2)


def _newton_polish(problem, x, opts, max_steps=6):
    """Newton steps on the box, Hessian by central differences of the gradient.

    L-BFGS-B reliably locates the optimum but stalls with gradients around
    1e-5 on the ill-conditioned omega/alpha/beta ridge; a few damped Newton
    steps push the projected gradient to ~1e-10.  Keeps the best iterate by
    projected-gradient norm; never worsens it.
    """
    val, g = problem.value_grad(x)
    best = (x, val, _projected_grad_norm(x, g, problem.lower, problem.upper))
    for _ in range(max_steps):
        x, val, gnorm = best
        if gnorm <= 1e-11:
            break
        k = x.shape[0]
        H = np.empty((k, k))
        for j in range(k):
            h = 1e-6 * (1.0 + abs(x[j]))
            xp, xm = x.copy(), x.copy()
            xp[j] = min(xp[j] + h, problem.upper[j])
            xm[j] = max(xm[j] - h, problem.lower[j])
            dx = xp[j] - xm[j]
            if dx <= 0:
                H[:, j] = 0.0
                H[j, j] = 1.0
                continue
            _, gp = problem.value_grad(xp)
            _, gm = problem.value_grad(xm)
            H[:, j] = (gp - gm) / dx
        H = 0.5 * (H + H.T)
        _, g = problem.value_grad(x)
        try:
            w = np.linalg.eigvalsh(H)
            ridge = max(0.0, 1e-10 - w[0])
            step = np.linalg.solve(H + ridge * np.eye(k), -g)
        except np.linalg.LinAlgError:
            break
        improved = False
        for damp in (1.0, 0.5, 0.25, 0.1):
            cand = np.clip(x + damp * step, problem.lower, problem.upper)
            cval, cg = problem.value_grad(cand)
            cnorm = _projected_grad_norm(cand, cg, problem.lower, problem.upper)
            if np.isfinite(cval) and cnorm < best[2]:
                best = (cand, cval, cnorm)
                improved = True
                break
        if not improved:
            break
    return best[0]


def _minimize_box(problem, x0, opts):
    bounds = list(zip(problem.lower, problem.upper))
    scipy_opts = {
        "maxiter": opts.max_iterations,
        "ftol": opts.tolerance_obj,
        "gtol": opts.tolerance_param,
        "maxcor": 12,
    }
    res = minimize(
        problem.value_grad, x0, jac=True, method="L-BFGS-B", bounds=bounds, options=scipy_opts
    )
    x = np.clip(res.x, problem.lower, problem.upper)
    return x, int(res.nit)


def _optimize(problem, opts, start_theta=None, light=False):
    """Minimize with restarts, Nelder-Mead fallback and the scaling polish.

    ``light`` runs a single quasi-Newton pass without restarts or rescue
    (used by the penalty stages of the constrained fit, which iterate anyway).
    Returns (xfree, value, grad_norm, iterations, converged).
    """
    spec = problem.spec
    starts = []
    if start_theta is not None:
        starts.append(problem.xfree_of(start_theta))
    else:
        starts.append(problem.xfree_of(Params.from_array(_default_start(spec), spec)))
    rng = np.random.default_rng(0xA5)

    best = None
    iterations = 0
    n_attempts = 1 if light else 1 + max(opts.restarts, 0)
    for attempt in range(n_attempts):
        if attempt >= len(starts):
            starts.append(problem.xfree_of(Params.from_array(_jittered_start(spec, rng), spec)))
        x = starts[attempt]
        x, nit = _minimize_box(problem, x, opts)
        iterations += nit
        if problem.penalty is None:
            x = _scaling_polish(problem, x)
            x = _newton_polish(problem, x, opts)
            x = _scaling_polish(problem, x)
        val, g = problem.value_grad(x)
        gnorm = _projected_grad_norm(x, g, problem.lower, problem.upper)
        converged = gnorm <= _CONVERGED_GRAD_TOL and np.isfinite(val)
        if best is None or (converged and not best[4]) or (converged == best[4] and val < best[1]):
            best = (x, val, gnorm, iterations, converged)
        if converged:
            break

    if not best[4] and not light:  # Nelder-Mead rescue from the best point so far
        nm = minimize(
            lambda xf: problem.value_grad(xf)[0],
            best[0],
            method="Nelder-Mead",
            options={"maxiter": 400 * len(best[0]), "xatol": 1e-10, "fatol": 1e-12},
        )
        x = np.clip(nm.x, problem.lower, problem.upper)
        x, nit = _minimize_box(problem, x, opts)
        iterations += int(nm.nit) + nit
        if problem.penalty is None:
            x = _scaling_polish(problem, x)
            x = _newton_polish(problem, x, opts)
        val, g = problem.value_grad(x)
        gnorm = _projected_grad_norm(x, g, problem.lower, problem.upper)
        converged = gnorm <= _CONVERGED_GRAD_TOL and np.isfinite(val)
        if converged or val < best[1]:
            best = (x, val, gnorm, iterations, converged)

    return best[0], best[1], best[2], iterations, best[4]


def _fit_core(spec, series, numerators, opts, start_theta=None, penalty=None, light=False):
    """Shared fitting path; series drives filtering, numerators the criterion.

    Standardizes by the sample second moment of ``series``, optimizes, and
    maps the intercept back to data units.
    """
    eps = validate_series(series)
    y = eps if numerators is None else validate_series(numerators)
    if y.shape[0] != eps.shape[0]:
        raise ParameterError("numerator series length mismatch")
    s = float(np.sqrt(np.mean(eps**2)))
    if s <= 0:
        raise DegenerateSeriesError("series is identically zero")
    z = eps / s
    yz = y / s

    start_z = None
    if start_theta is not None:
        start_z = rescale_intercept(spec, start_theta, 1.0 / s)

    problem = _BoxProblem(spec, z, yz, opts, penalty=penalty)
    xfree, val, gnorm, iters, converged = _optimize(problem, opts, start_z, light=light)
    theta_z = problem.theta_of(xfree)
    theta = rescale_intercept(spec, theta_z, s)

    vol = filter_volatility(spec, theta, eps)
    resid = y / np.sqrt(vol.sigma2)
    loglik = -float(np.mean(0.5 * resid**2 + 0.5 * np.log(vol.sigma2)))
    return FitResult(
        spec=spec,
        theta_hat=theta,
        loglik=loglik,
        vol=vol,
        residuals=resid,
        converged=converged,
        iterations=iters,
        series=eps,
        score_norm=gnorm,
    )


# ---------------------------------------------------------------------------
# Public fits


def fit(spec: ModelSpec, series, opts: OptimOptions | None = None) -> FitResult:
    """Maximize the quasi-likelihood over the search box.

    Returns a :class:`FitResult` whose ``converged`` flag reflects the final
    projected gradient; a failed search is reported, never silently accepted.
    """
    _require_estimable(spec)
    opts = opts or OptimOptions()
    eps = validate_series(series)
    if eps.shape[0] <= spec.n_params:
        raise ParameterError("series shorter than the parameter count")
    free_ab = [i for i in range(1, spec.n_params) if i not in opts.freeze_zero]
    if free_ab and float(np.ptp(eps**2)) == 0.0:
        raise DegenerateSeriesError(
            "constant squared returns: alpha/beta are not identified"
        )
    return _fit_core(spec, eps, None, opts)


def fit_constrained(
    spec: ModelSpec,
    series,
    mu_hat: MomentVector,
    m: int,
    opts: OptimOptions | None = None,
    upper: bool = True,
    mode: SpectralMode = SpectralMode.RADIUS,
    unconstrained: FitResult | None = None,
) -> FitResult:
    """Maximize the quasi-likelihood subject to tau(theta, mu_hat) <= 1.

    With ``upper=False`` the constraint direction flips to tau >= 1 (reversed
    null hypothesis).  If the unconstrained optimum already satisfies the
    constraint it is returned unchanged; otherwise an exterior quadratic
    penalty with the schedule in ``opts`` is followed by a bisection scaling
    the alpha block so the solution lands on the constraint boundary within
    ``EPS_CONSTRAINT``.
    """
    _require_estimable(spec)
    opts = opts or OptimOptions()
    base = unconstrained if unconstrained is not None else fit(spec, series, opts)

    tau0 = tau(spec, base.theta_hat, mu_hat, m, mode)
    if (upper and tau0 <= 1.0) or (not upper and tau0 >= 1.0):
        return dataclasses.replace(base, constrained=True, tau_at_solution=tau0)

    sign = 1.0 if upper else -1.0

    theta_cur = base.theta_hat
    iterations = base.iterations
    converged = True
    for kappa in opts.penalty_schedule:

        def penalty(theta, _k=kappa):
            value, dtau = tau_value_gradient(spec, theta, mu_hat, m, mode)
            viol = sign * (value - 1.0)
            if viol <= 0.0:
                return 0.0, np.zeros(spec.n_params)
            return _k * viol * viol, 2.0 * _k * viol * sign * dtau

        result = _fit_core(
            spec, series, None, opts, start_theta=theta_cur, penalty=penalty, light=True
        )
        theta_cur = result.theta_hat
        iterations += result.iterations
        converged = result.converged

    theta_final = _project_alpha_boundary(spec, theta_cur, mu_hat, m, mode, upper)
    tau_final = tau(spec, theta_final, mu_hat, m, mode)

    vol = filter_volatility(spec, theta_final, base.series)
    resid = compute_residuals(base.series, vol)
    loglik = -float(np.mean(0.5 * resid**2 + 0.5 * np.log(vol.sigma2)))
    return FitResult(
        spec=spec,
        theta_hat=theta_final,
        loglik=loglik,
        vol=vol,
        residuals=resid,
        converged=converged,
        iterations=iterations,
        series=base.series,
        score_norm=result.score_norm,
        constrained=True,
        tau_at_solution=tau_final,
    )


def _project_alpha_boundary(spec, theta, mu_hat, m, mode, upper):
    """Rescale the alpha block so tau lands on the unit boundary.

    tau is nondecreasing in every alpha entry, so phi(lam) = tau(theta with
    lam * alpha) - 1 is monotone in lam; the feasible side is kept within
    EPS_CONSTRAINT of the boundary.
    """

    def phi(lam):
        cand = Params(theta.omega, lam * theta.alpha, theta.beta)
        return tau(spec, cand, mu_hat, m, mode) - 1.0

    f1 = phi(1.0)
    if upper and -EPS_CONSTRAINT <= f1 <= 0.0:
        return theta
    if not upper and 0.0 <= f1 <= EPS_CONSTRAINT:
        return theta

    if f1 > 0.0:
        # boundary lies below lam = 1: shrink the alpha block
        lo, hi = 0.0, 1.0
        if phi(lo) > 0.0:
            if upper:
                raise InfeasibleConstraintError(
                    "tau exceeds one even with the alpha block at zero"
                )
            return theta  # lower direction: feasible on all of [0, 1]
    else:
        # boundary lies above lam = 1: grow until the box cap binds
        amax = float(np.max(theta.alpha)) if theta.alpha.size else 0.0
        if amax <= 0.0:
            if upper:
                return theta  # zero alpha block and tau <= 1: feasible as is
            raise InfeasibleConstraintError("cannot reach tau >= 1 with a zero alpha block")
        cap = _AB_MAX / amax
        lo, hi = 1.0, min(2.0, cap)
        while phi(hi) < 0.0 and hi < cap:
            lo, hi = hi, min(hi * 2.0, cap)
        if phi(hi) < 0.0:
            if upper:
                return theta  # boundary unreachable inside the box; still feasible
            raise InfeasibleConstraintError("tau stays below one inside the search box")

    # Bisect keeping phi(lo) <= 0 <= phi(hi); stop once the feasible endpoint
    # sits within EPS_CONSTRAINT of the boundary.
    for _ in range(200):
        target = lo if upper else hi
        ft = phi(target)
        if (upper and ft >= -EPS_CONSTRAINT) or (not upper and ft <= EPS_CONSTRAINT):
            break
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    lam = lo if upper else hi
    return Params(theta.omega, lam * theta.alpha, theta.beta)


# ---------------------------------------------------------------------------
# Asymptotic covariance blocks


@dataclass(frozen=True, eq=False)
class SigmaBlocks:
    """Plug-in estimates of the joint asymptotic covariance components."""

    J: np.ndarray
    Omega: np.ndarray
    nu: np.ndarray
    xi: np.ndarray
    Upsilon: np.ndarray
    Xi: np.ndarray
    mu4: float
    Sigma: np.ndarray


def sigma_blocks(fit_result: FitResult, spec: ModelSpec, m: int) -> SigmaBlocks:
    """Plug-in covariance of (sqrt(n)(theta_hat - theta), sqrt(n)(mu_hat - mu)).

    Built from D_t = d sigma_t/d theta / sigma_t = d sigma_t^2/d theta
    / (2 sigma_t^2) and the residual moment arrays; assembled as M Psi M' so
    the result is symmetric PSD with top-left block ((mu4-1)/4) J^{-1} exactly.
    """
    _require_estimable(spec)
    if not fit_result.converged:
        raise ParameterError("sigma_blocks requires a converged fit")
    theta = fit_result.theta_hat
    eps = fit_result.series
    n = eps.shape[0]
    s2 = float(np.mean(eps**2))
    pre_sig2, dpre = _presample_with_grad(spec, theta, s2)
    sig2, dsig2 = garch_filter_grad(
        eps, spec.q, spec.p, theta.omega, theta.alpha, theta.beta, s2, pre_sig2, dpre, VOL_FLOOR
    )
    D = dsig2 / (2.0 * sig2[:, None])
    J = D.T @ D / n
    _check_nonsingular(J, spec)
    Omega = D.mean(axis=0)

    eta = fit_result.residuals
    ks = np.arange(1, m + 1, dtype=float)
    pw = eta[:, None] ** (2 * ks)
    mu = pw.mean(axis=0)
    mu4 = float(np.mean(eta**4))
    nu = 2.0 * ks * mu  # E[eta h'(eta)] for h_k = x^(2k)
    xi = pw.T @ pw[:, 0] / n - mu * mu[0]
    Upsilon = pw.T @ pw / n - np.outer(mu, mu)

    Jinv = np.linalg.inv(J)
    r = spec.n_params
    dim = m
    M = np.zeros((r + dim, r + dim))
    M[:r, :r] = 0.5 * Jinv
    M[r:, :r] = -0.5 * np.outer(nu, Omega) @ Jinv
    M[r:, r:] = np.eye(dim)
    Psi = np.zeros((r + dim, r + dim))
    Psi[:r, :r] = (mu4 - 1.0) * J
    Psi[:r, r:] = np.outer(Omega, xi)
    Psi[r:, :r] = np.outer(xi, Omega)
    Psi[r:, r:] = Upsilon
    Sigma = M @ Psi @ M.T
    Sigma = 0.5 * (Sigma + Sigma.T)
    Xi = Sigma[r:, r:]
    return SigmaBlocks(J=J, Omega=Omega, nu=nu, xi=xi, Upsilon=Upsilon, Xi=Xi, mu4=mu4, Sigma=Sigma)


def _check_nonsingular(J, spec):
    w, V = np.linalg.eigh(J)
    if w[0] <= 1e-12 * max(w[-1], 1.0):
        names = ["omega"]
        names += [f"alpha{i+1}" for i in range(spec.n_alpha)]
        names += [f"beta{j+1}" for j in range(spec.p)]
        load = ", ".join(f"{nm}={c:+.3f}" for nm, c in zip(names, V[:, 0]))
        raise SingularMatrixError(
            f"J is numerically singular; degenerate direction: ({load})"
        )


def wald_variance_garch11(fit_result: FitResult, m: int) -> float:
    """Delta-method variance of the GARCH(1,1) test statistic.

    Differentiates the closed-form tau analytically in (alpha, beta, mu) and
    sandwiches the plug-in covariance; the omega derivative is zero.
    """
    spec = fit_result.spec
    if spec.family is not Family.GARCH or spec.p != 1 or spec.q != 1:
        raise ParameterError("the closed-form Wald variance requires GARCH(1,1)")
    blocks = sigma_blocks(fit_result, spec, m)
    eta = fit_result.residuals
    ks = np.arange(1, m + 1, dtype=float)
    mu = MomentVector(m, np.mean(eta[:, None] ** (2 * ks), axis=0))
    d_alpha, d_beta, d_mu = closed_form_garch11_gradient(
        float(fit_result.theta_hat.alpha[0]), float(fit_result.theta_hat.beta[0]), mu, m
    )
    grad = np.concatenate(([0.0, d_alpha, d_beta], d_mu))
    return float(grad @ blocks.Sigma @ grad)
