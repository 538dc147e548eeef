"""GARCH-family model specifications, simulation, filtering and residual moments.

The conditional volatility families supported here share the multiplicative
structure ``eps_t = sigma_t * eta_t`` with an i.i.d. innovation sequence and a
linear recursion for the volatility state:

* ARCH(q), GARCH(p,q): recursion in sigma_t^2,
* T-GARCH(p,q): recursion in sigma_t (levels, signed innovation parts),
* AP-GARCH(p,q): recursion in sigma_t^delta,
* GJR-GARCH(p,q): recursion in sigma_t^2 with signed squared parts.

Quasi-likelihood estimation is only offered for ARCH/GARCH (see
``garchmoments.estimation``); the remaining families are supported for
simulation, filtering and the moment-condition machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._recursions import garch_filter, garch_simulate
from .exceptions import ParameterError, PathOverflowError

#: Lower bound enforced on filtered sigma^2 (guards numerically vanishing
#: intercepts inside the optimizer; the volatility itself must stay positive).
VOL_FLOOR = 1e-12

#: Default number of presample observations discarded by :func:`simulate`.
DEFAULT_BURN_IN = 500


class Family(str, Enum):
    ARCH = "arch"
    GARCH = "garch"
    TGARCH = "tgarch"
    APGARCH = "apgarch"
    GJRGARCH = "gjrgarch"


#: Families whose companion matrix is affine in a single scalar transform of
#: the innovation (eta^2 for ARCH/GARCH, (|eta|-gamma*eta)^delta for AP-GARCH).
SINGLE_TRANSFORM_FAMILIES = (Family.ARCH, Family.GARCH, Family.APGARCH)

#: Families with separate coefficients for positive/negative innovation parts.
TWO_SIDED_FAMILIES = (Family.TGARCH, Family.GJRGARCH)


@dataclass(frozen=True)
class ModelSpec:
    """Family identifier plus lag orders and family-specific shape constants.

    Parameters
    ----------
    family : Family
        One of ARCH, GARCH, TGARCH, APGARCH, GJRGARCH.
    q : int
        Innovation lag order (>= 1).
    p : int
        Volatility lag order; must be 0 for ARCH and >= 1 otherwise.
    delta : float, optional
        Power exponent, AP-GARCH only (> 0).
    gamma : float, optional
        Asymmetry coefficient, AP-GARCH only (in (-1, 1)).
    """

    family: Family
    q: int
    p: int = 0
    delta: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        if self.q < 1:
            raise ParameterError(f"q must be >= 1, got {self.q}")
        if family is Family.ARCH:
            if self.p != 0:
                raise ParameterError("ARCH requires p = 0")
        elif self.p < 1:
            raise ParameterError(f"{family.value} requires p >= 1, got p={self.p}")
        if family is Family.APGARCH:
            if self.delta is None or self.delta <= 0:
                raise ParameterError("AP-GARCH requires delta > 0")
            if self.gamma is None or not -1 < self.gamma < 1:
                raise ParameterError("AP-GARCH requires gamma in (-1, 1)")
        elif self.delta is not None or self.gamma is not None:
            raise ParameterError("delta/gamma are AP-GARCH specific")

    @property
    def n_alpha(self) -> int:
        """Number of alpha entries (2q for the two-sided families)."""
        return 2 * self.q if self.family in TWO_SIDED_FAMILIES else self.q

    @property
    def n_params(self) -> int:
        """Length r of the parameter vector (omega, alpha, beta)."""
        return 1 + self.n_alpha + self.p

    @property
    def a_dim(self) -> int:
        """Row dimension of the companion matrix A(theta, eta)."""
        return self.n_alpha + self.p

    @property
    def state_power(self) -> float:
        """Exponent k such that the recursion runs on the sigma^k scale."""
        if self.family is Family.TGARCH:
            return 1.0
        if self.family is Family.APGARCH:
            return float(self.delta)
        return 2.0


@dataclass(frozen=True, eq=False)
class Params:
    """Parameter vector theta = (omega, alpha_1..alpha_q, beta_1..beta_p).

    For T-GARCH/GJR-GARCH, ``alpha`` interleaves the signed pairs
    (a_1^+, a_1^-, ..., a_q^+, a_q^-).  All entries are nonnegative and
    omega is strictly positive.
    """

    omega: float
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        object.__setattr__(self, "beta", np.asarray(self.beta, dtype=float).reshape(-1))

    def validate(self, spec: ModelSpec) -> "Params":
        if not np.isfinite(self.omega) or self.omega <= 0:
            raise ParameterError(f"omega must be positive, got {self.omega}")
        if self.alpha.shape != (spec.n_alpha,):
            raise ParameterError(
                f"alpha must have length {spec.n_alpha} for {spec.family.value}"
                f"({spec.p},{spec.q}), got {self.alpha.shape[0]}"
            )
        if self.beta.shape != (spec.p,):
            raise ParameterError(f"beta must have length {spec.p}, got {self.beta.shape[0]}")
        if np.any(~np.isfinite(self.alpha)) or np.any(self.alpha < 0):
            raise ParameterError("alpha entries must be finite and >= 0")
        if np.any(~np.isfinite(self.beta)) or np.any(self.beta < 0):
            raise ParameterError("beta entries must be finite and >= 0")
        return self

    def to_array(self) -> np.ndarray:
        return np.concatenate(([self.omega], self.alpha, self.beta))

    @staticmethod
    def from_array(values, spec: ModelSpec) -> "Params":
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.shape[0] != spec.n_params:
            raise ParameterError(f"expected {spec.n_params} parameters, got {values.shape[0]}")
        na = spec.n_alpha
        return Params(values[0], values[1 : 1 + na], values[1 + na :])


@dataclass(frozen=True, eq=False)
class VolatilityPath:
    """Filtered sigma_t^2 path together with the presample constant used."""

    sigma2: np.ndarray
    presample_value: float

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.sigma2)


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Sample or population moments mu = E[h(eta)] of the innovations.

    For ARCH/GARCH ``mu`` has length m and holds (mu_2, mu_4, ..., mu_2m);
    mu_0 = 1 is implicit.  For the two-sided families it follows the layout
    of :func:`h_eval` and has length 2m.
    """

    m: int
    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float).reshape(-1))
        if self.m < 1:
            raise ParameterError(f"m must be >= 1, got {self.m}")


def gaussian_moments(m: int) -> MomentVector:
    """Even moments (mu_2, ..., mu_2m) of the standard normal: (2k-1)!!."""
    mu = np.empty(m)
    acc = 1.0
    for k in range(1, m + 1):
        acc *= 2 * k - 1
        mu[k - 1] = acc
    return MomentVector(m, mu)


def validate_series(series) -> np.ndarray:
    series = np.asarray(series, dtype=float).reshape(-1)
    if series.shape[0] < 1:
        raise ParameterError("series must contain at least one observation")
    if np.any(~np.isfinite(series)):
        raise ParameterError("series contains non-finite values")
    return series


def _positive_parts(x):
    x = np.asarray(x, dtype=float)
    return np.maximum(x, 0.0), np.maximum(-x, 0.0)


# ---------------------------------------------------------------------------
# Simulation


def simulate(spec: ModelSpec, theta: Params, innovations, burn_in: int = DEFAULT_BURN_IN) -> np.ndarray:
    """Simulate a return path eps_t = sigma_t * eta_t from the family recursion.

    The volatility state starts at omega / (1 - sum(alpha) - sum(beta)) when
    that persistence sum is below one and at omega otherwise; all presample
    lags are filled with the same value.  The first ``burn_in`` observations
    are discarded, so ``innovations`` must have length n + burn_in.

    Raises
    ------
    PathOverflowError
        If the recursion produces non-finite values (explosive path).
    """
    theta.validate(spec)
    eta = validate_series(innovations)
    if burn_in < 0:
        raise ParameterError("burn_in must be nonnegative")
    if eta.shape[0] <= burn_in:
        raise ParameterError("innovations must be longer than burn_in")

    persistence = float(np.sum(theta.alpha) + np.sum(theta.beta))
    init = theta.omega / (1.0 - persistence) if persistence < 1.0 else theta.omega

    if spec.family in (Family.ARCH, Family.GARCH):
        eps, _ = garch_simulate(eta, spec.q, spec.p, theta.omega, theta.alpha, theta.beta, init)
    else:
        eps = _simulate_two_sided(spec, theta, eta, init)

    if np.any(~np.isfinite(eps)):
        raise PathOverflowError("path overflow: simulated recursion produced non-finite values")
    return eps[burn_in:]


def _simulate_two_sided(spec, theta, eta, init):
    """Python-loop simulation for T-GARCH / AP-GARCH / GJR-GARCH.

    The volatility state (sigma^kappa) and all its lags start at ``init``;
    presample innovation-transform lags likewise (split evenly between the
    signed parts for the two-sided families).  Burn-in absorbs the
    initialization for these families.
    """
    n = eta.shape[0]
    q, p = spec.q, spec.p
    kappa = spec.state_power
    ap = spec.family is Family.APGARCH
    eps = np.empty(n)
    state = np.empty(n)  # sigma^kappa
    for t in range(n):
        v = theta.omega
        for i in range(1, q + 1):
            if t - i >= 0:
                e = eps[t - i]
                if ap:
                    v += theta.alpha[i - 1] * (abs(e) - spec.gamma * e) ** spec.delta
                else:
                    ep, en = max(e, 0.0), max(-e, 0.0)
                    if spec.family is Family.GJRGARCH:
                        ep, en = ep * ep, en * en
                    v += theta.alpha[2 * (i - 1)] * ep + theta.alpha[2 * i - 1] * en
            else:
                if ap:
                    v += theta.alpha[i - 1] * init
                else:
                    v += (theta.alpha[2 * (i - 1)] + theta.alpha[2 * i - 1]) * init / 2.0
        for j in range(1, p + 1):
            v += theta.beta[j - 1] * (state[t - j] if t - j >= 0 else init)
        state[t] = v
        eps[t] = v ** (1.0 / kappa) * eta[t]
        if not np.isfinite(eps[t]):
            eps[t:] = np.inf
            break
    return eps


# ---------------------------------------------------------------------------
# Filtering


#: Guard on 1 - sum(beta) in the presample fixed point.
_PRESAMPLE_DENOM_FLOOR = 1e-6


def presample_state(spec: ModelSpec, theta: Params, s2: float) -> float:
    """Presample volatility state implied by constant presample observations.

    Padding the infinite recursion with observations of squared magnitude
    ``s2`` drives the state (sigma^2, sigma, or sigma^delta depending on the
    family) to the fixed point (omega + <alpha, presample terms>) / (1 -
    sum(beta)).  Using the fixed point rather than ``s2`` itself keeps the
    parameter-scaling identity of the filter exact at every t.
    """
    denom = max(1.0 - float(np.sum(theta.beta)), _PRESAMPLE_DENOM_FLOOR)
    if spec.family in (Family.ARCH, Family.GARCH):
        drive = s2 * float(np.sum(theta.alpha))
    elif spec.family is Family.GJRGARCH:
        drive = 0.5 * s2 * float(np.sum(theta.alpha))
    elif spec.family is Family.TGARCH:
        drive = 0.5 * np.sqrt(s2) * float(np.sum(theta.alpha))
    else:  # APGARCH
        g, d = spec.gamma, spec.delta
        pre_trans = 0.5 * ((1 - g) ** d + (1 + g) ** d) * s2 ** (d / 2.0)
        drive = pre_trans * float(np.sum(theta.alpha))
    return (theta.omega + drive) / denom


def filter_volatility(spec: ModelSpec, theta: Params, series, floor: float = VOL_FLOOR) -> VolatilityPath:
    """Filter sigma_t^2 from observed returns with truncated initial conditions.

    Presample observations (t <= 0) carry the sample second moment of the
    series; the presample volatility state is the fixed point they imply (see
    :func:`presample_state`).  Filtered values are clamped at ``floor``.  The
    output is deterministic given the inputs.
    """
    theta.validate(spec)
    eps = validate_series(series)
    presample = float(np.mean(eps**2))

    if spec.family in (Family.ARCH, Family.GARCH):
        pre_sig2 = presample_state(spec, theta, presample)
        sig2 = garch_filter(
            eps, spec.q, spec.p, theta.omega, theta.alpha, theta.beta, presample, pre_sig2, floor
        )
        return VolatilityPath(sig2, presample)

    sig2 = _filter_two_sided(spec, theta, eps, presample, floor)
    return VolatilityPath(sig2, presample)


def _filter_two_sided(spec, theta, eps, presample, floor):
    n = eps.shape[0]
    q, p = spec.q, spec.p
    kappa = spec.state_power
    s = np.sqrt(presample)
    pre_state = presample_state(spec, theta, presample)
    state = np.empty(n)
    if spec.family is Family.APGARCH:
        g, d = spec.gamma, spec.delta
        trans = (np.abs(eps) - g * eps) ** d
        # presample transform: average of the two sign branches at magnitude s
        pre_trans = 0.5 * ((1 - g) ** d + (1 + g) ** d) * s**d
        for t in range(n):
            v = theta.omega
            for i in range(1, q + 1):
                v += theta.alpha[i - 1] * (trans[t - i] if t - i >= 0 else pre_trans)
            for j in range(1, p + 1):
                v += theta.beta[j - 1] * (state[t - j] if t - j >= 0 else pre_state)
            state[t] = max(v, floor ** (d / 2.0))
        return state ** (2.0 / d)

    ep, en = _positive_parts(eps)
    if spec.family is Family.GJRGARCH:
        tp, tn = ep**2, en**2
        pre_pair = presample / 2.0
    else:  # TGARCH
        tp, tn = ep, en
        pre_pair = s / 2.0
    for t in range(n):
        v = theta.omega
        for i in range(1, q + 1):
            a_pos = theta.alpha[2 * (i - 1)]
            a_neg = theta.alpha[2 * i - 1]
            if t - i >= 0:
                v += a_pos * tp[t - i] + a_neg * tn[t - i]
            else:
                v += (a_pos + a_neg) * pre_pair
        for j in range(1, p + 1):
            v += theta.beta[j - 1] * (state[t - j] if t - j >= 0 else pre_state)
        state[t] = max(v, floor ** (kappa / 2.0))
    return state ** (2.0 / kappa)


def residuals(series, vol: VolatilityPath) -> np.ndarray:
    """Standardized residuals eta_hat_t = eps_t / sigma_tilde_t."""
    eps = validate_series(series)
    sig2 = vol.sigma2
    if sig2.shape[0] != eps.shape[0]:
        raise ParameterError("series and volatility path lengths differ")
    if np.any(sig2 <= 0):
        raise ParameterError("volatility path must be strictly positive")
    return eps / np.sqrt(sig2)


# ---------------------------------------------------------------------------
# Scaling map


def scale_params(spec: ModelSpec, theta: Params, lam: float) -> Params:
    """Map theta to theta_lam so the filtered volatility scales by ``lam``.

    With observations held fixed, filtering at the returned vector multiplies
    sigma_t by lam (sigma_t^2 by lam^2).  For GARCH this is
    (lam^2 omega, lam^2 alpha, beta); the power adapts to the family's
    recursion scale.
    """
    if not np.isfinite(lam) or lam <= 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    theta.validate(spec)
    factor = lam**spec.state_power
    return Params(factor * theta.omega, factor * theta.alpha, theta.beta.copy())


def rescale_intercept(spec: ModelSpec, theta: Params, lam: float) -> Params:
    """Map theta fitted on series/lam back to the original data scale.

    Only the intercept carries data units: scaling the observations by lam
    scales omega by lam**state_power and leaves alpha, beta unchanged.
    """
    if not np.isfinite(lam) or lam <= 0:
        raise ParameterError(f"lambda must be positive, got {lam}")
    return Params(lam**spec.state_power * theta.omega, theta.alpha.copy(), theta.beta.copy())


# ---------------------------------------------------------------------------
# Innovation moment function


def h_eval(spec: ModelSpec, m: int, x: float) -> np.ndarray:
    """Evaluate the family moment function h at a scalar x.

    ARCH/GARCH: (x^2, x^4, ..., x^2m).
    T-GARCH: (x+, ..., (x+)^m, x-, ..., (x-)^m).
    AP-GARCH: ((x+)^d, ..., (x+)^dm, (x-)^d, ..., (x-)^dm).
    GJR-GARCH: ((x+)^2, ..., (x+)^2m, (x-)^2, ..., (x-)^2m).
    """
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    ks = np.arange(1, m + 1, dtype=float)
    if spec.family in (Family.ARCH, Family.GARCH):
        return float(x) ** (2 * ks)
    xp, xn = max(float(x), 0.0), max(-float(x), 0.0)
    if spec.family is Family.TGARCH:
        expo = ks
    elif spec.family is Family.GJRGARCH:
        expo = 2 * ks
    else:  # APGARCH
        expo = spec.delta * ks
    return np.concatenate((xp**expo, xn**expo))


def moment_dim(spec: ModelSpec, m: int) -> int:
    """Length of h(.) / the moment vector for the family."""
    return m if spec.family in (Family.ARCH, Family.GARCH) else 2 * m


def estimate_moments(resid, spec: ModelSpec, m: int) -> MomentVector:
    """Componentwise sample mean of h over the residuals."""
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    eta = np.asarray(resid, dtype=float).reshape(-1)
    if eta.shape[0] < 1:
        raise ParameterError("residual sample must be nonempty")
    ks = np.arange(1, m + 1, dtype=float)
    if spec.family in (Family.ARCH, Family.GARCH):
        mu = np.mean(eta[:, None] ** (2 * ks), axis=0)
    else:
        if spec.family is Family.TGARCH:
            expo = ks
        elif spec.family is Family.GJRGARCH:
            expo = 2 * ks
        else:
            expo = spec.delta * ks
        xp, xn = _positive_parts(eta)
        mu = np.concatenate(
            (np.mean(xp[:, None] ** expo, axis=0), np.mean(xn[:, None] ** expo, axis=0))
        )
    if np.any(~np.isfinite(mu)):
        raise ParameterError("moment accumulation produced non-finite values")
    return MomentVector(m, mu)
