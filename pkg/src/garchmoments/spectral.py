"""Companion matrices, Kronecker-power moment conditions and the tau functional.

The 2m-th moment of a GARCH-family process is finite iff the spectral value
of E[A(theta, eta)^(x)m] lies below one, where A is the family's companion
matrix and ^(x)m the m-fold Kronecker power.  For families whose A is affine
in a single scalar transform of eta, the Kronecker power splits into
coefficient matrices B_{k,m}(theta) so that the expectation reduces to a
moment-weighted sum; the split is built by the recursion

    B_{0,m+1} = B_{0,m} (x) B_0,
    B_{k+1,m+1} = B_{k+1,m} (x) B_0 + B_{k,m} (x) B_1,
    B_{m+1,m+1} = B_{m,m} (x) B_1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import reduce

import numpy as np

from ._recursions import kron_add, kron_dense
from .exceptions import (
    ConvergenceError,
    DecompositionUnsupportedError,
    DimensionCapError,
    ParameterError,
)
from .models import (
    Family,
    ModelSpec,
    MomentVector,
    Params,
    SINGLE_TRANSFORM_FAMILIES,
    TWO_SIDED_FAMILIES,
    estimate_moments,
)

#: Dense Kronecker powers are refused beyond this dimension.
DIM_CAP = 10_000

_POWER_TOL = 1e-12
_POWER_MAX_ITER = 100_000


class SpectralMode(str, Enum):
    RADIUS = "radius"
    NORM = "norm"


# ---------------------------------------------------------------------------
# Companion matrix


def build_A(spec: ModelSpec, theta: Params, eta: float) -> np.ndarray:
    """Companion matrix A(theta, eta) of the squared-process recursion.

    The innovation enters through the family transform: eta^2 for ARCH/GARCH,
    (|eta| - gamma*eta)^delta for AP-GARCH, the signed parts (eta+, eta-) for
    T-GARCH and their squares for GJR-GARCH.  Identity/zero blocks degenerate
    correctly for p or q equal to one (or p = 0 for ARCH).
    """
    theta.validate(spec)
    q, p = spec.q, spec.p
    dim = spec.a_dim
    A = np.zeros((dim, dim))
    coeffs = np.concatenate((theta.alpha, theta.beta))

    if spec.family in TWO_SIDED_FAMILIES:
        ep, en = max(float(eta), 0.0), max(-float(eta), 0.0)
        if spec.family is Family.GJRGARCH:
            up, un = ep * ep, en * en
        else:
            up, un = ep, en
        A[0, :] = up * coeffs
        A[1, :] = un * coeffs
        for i in range(2 * q - 2):  # shift rows for lagged signed parts
            A[2 + i, i] = 1.0
        A[2 * q, :] = coeffs
        for j in range(p - 1):  # shift rows for lagged volatility states
            A[2 * q + 1 + j, 2 * q + j] = 1.0
        return A

    u = _transform(spec, float(eta))
    A[0, :] = u * coeffs
    for i in range(q - 1):
        A[1 + i, i] = 1.0
    if p > 0:
        A[q, :] = coeffs
        for j in range(p - 1):
            A[q + 1 + j, q + j] = 1.0
    return A


def _transform(spec: ModelSpec, eta: float) -> float:
    if spec.family is Family.APGARCH:
        return (abs(eta) - spec.gamma * eta) ** spec.delta
    return eta * eta


# ---------------------------------------------------------------------------
# Kronecker powers


def kron_power(M: np.ndarray, m: int) -> np.ndarray:
    """m-fold Kronecker product of M with itself."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParameterError("kron_power expects a square matrix")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    _check_dim_cap(M.shape[0], m)
    return reduce(np.kron, (M for _ in range(m)))


def _check_dim_cap(dim: int, m: int):
    if dim**m > DIM_CAP:
        raise DimensionCapError(
            f"Kronecker dimension {dim}**{m} exceeds the dense cap {DIM_CAP}"
        )


@dataclass(frozen=True, eq=False)
class KroneckerDecomposition:
    """Matrices B_{0,m}, ..., B_{m,m} with A^(x)m = sum_k B_{k,m} u^k."""

    m: int
    B: list

    def evaluate(self, u: float) -> np.ndarray:
        return sum(b * u**k for k, b in enumerate(self.B))


def coefficient_matrices(spec: ModelSpec, theta: Params, m: int) -> KroneckerDecomposition:
    """Split A(theta, eta)^(x)m into powers of the innovation transform.

    Only available for families whose companion matrix is affine in a single
    scalar transform of eta (ARCH, GARCH, AP-GARCH); T-GARCH and GJR-GARCH
    mix two transforms and are rejected.
    """
    if spec.family not in SINGLE_TRANSFORM_FAMILIES:
        raise DecompositionUnsupportedError(
            f"{spec.family.value} mixes two innovation transforms; "
            "average Kronecker powers over the residual sample instead"
        )
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    _check_dim_cap(spec.a_dim, m)

    B0 = build_A(spec, theta, 0.0)  # transform vanishes at eta = 0
    u1 = _transform(spec, 1.0)
    B1 = (build_A(spec, theta, 1.0) - B0) / u1

    mats = [B0, B1]
    for _ in range(m - 1):
        nxt = [kron_dense(mats[0], B0)]
        for k in range(len(mats) - 1):
            nxt.append(kron_add(kron_dense(mats[k + 1], B0), mats[k], B1))
        nxt.append(kron_dense(mats[-1], B1))
        mats = nxt
    return KroneckerDecomposition(m, mats)


def _transform_moments(spec: ModelSpec, mu: MomentVector, m: int) -> np.ndarray:
    """Moments c_k = E[u(eta)^k], k = 0..m, of the family transform."""
    c = np.empty(m + 1)
    c[0] = 1.0
    if spec.family in (Family.ARCH, Family.GARCH):
        if mu.m < m:
            raise ParameterError(f"moment vector covers m={mu.m}, need m={m}")
        c[1:] = mu.mu[:m]
        return c
    # AP-GARCH: u^k = (1-gamma)^(dk) (eta+)^(dk) + (1+gamma)^(dk) (eta-)^(dk)
    if mu.m < m or mu.mu.shape[0] != 2 * mu.m:
        raise ParameterError("AP-GARCH needs the two-sided moment vector up to order m")
    g, d = spec.gamma, spec.delta
    for k in range(1, m + 1):
        c[k] = (1 - g) ** (d * k) * mu.mu[k - 1] + (1 + g) ** (d * k) * mu.mu[mu.m + k - 1]
    return c


def expected_kron(spec: ModelSpec, theta: Params, mu: MomentVector, m: int) -> np.ndarray:
    """E[A(theta, eta)^(x)m] = sum_k B_{k,m}(theta) * E[u^k] with E[u^0] = 1."""
    decomp = coefficient_matrices(spec, theta, m)
    c = _transform_moments(spec, mu, m)
    out = np.zeros_like(decomp.B[0])
    for k, b in enumerate(decomp.B):
        out += c[k] * b
    return out


# ---------------------------------------------------------------------------
# Spectral functionals


def _gelfand_radius(M: np.ndarray, tol: float) -> float:
    """Spectral radius via lim ||M^(2^j)||_F^(1/2^j) with repeated squaring."""
    A = np.asarray(M, dtype=float)
    n0 = np.linalg.norm(A)
    if n0 == 0.0:
        return 0.0
    A = A / n0
    log_scale = math.log(n0)
    estimate = n0
    for j in range(1, 80):
        B = A @ A
        nb = np.linalg.norm(B)
        if nb == 0.0 or not np.isfinite(nb):
            return 0.0 if nb == 0.0 else estimate
        A = B / nb
        log_scale = 2.0 * log_scale + math.log(nb)
        new_estimate = math.exp(log_scale / 2**j)
        if abs(new_estimate - estimate) <= tol * max(1.0, abs(new_estimate)):
            return new_estimate
        estimate = new_estimate
    raise ConvergenceError(
        f"Gelfand iteration stagnated at estimate {estimate} (dim={M.shape[0]})"
    )


def _power_iteration(M: np.ndarray, tol: float, max_iter: int):
    """Dominant eigenvalue/vector by power iteration from the all-ones vector.

    Returns (value, vector, converged).  The all-ones start lies in the
    positive cone, so for nonnegative matrices the iteration targets the
    Perron root; `converged` is False on stagnation (rotating iterates).
    """
    dim = M.shape[0]
    v = np.full(dim, 1.0 / math.sqrt(dim))
    lam = 0.0
    best_res = math.inf
    since_improved = 0
    for _ in range(max_iter):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # M^k (positive vector) hit zero: nilpotent nonnegative matrix
            return 0.0, v, True
        lam = float(v @ w)
        res = float(np.max(np.abs(w - lam * v)))
        scale = max(1.0, abs(lam))
        if res <= tol * scale:
            return lam, w / nw, True
        if res < 0.9 * best_res:
            best_res = res
            since_improved = 0
        else:
            since_improved += 1
            if since_improved >= 500:
                return lam, w / nw, False
        v = w / nw
    return lam, v, False


def spectral_value(M: np.ndarray, mode: SpectralMode = SpectralMode.RADIUS) -> float:
    """Largest-modulus eigenvalue (Radius) or largest singular value (Norm).

    Power iteration with an all-ones start vector, falling back to Gelfand's
    formula lim ||M^k||^(1/k) when the iteration stagnates (e.g. rotating
    dominant eigenvalues of a periodic nonnegative matrix).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ParameterError("spectral_value expects a square matrix")
    if np.any(~np.isfinite(M)):
        raise ParameterError("matrix entries must be finite")
    mode = SpectralMode(mode)
    if mode is SpectralMode.NORM:
        S = M.T @ M
        lam, _, ok = _power_iteration(S, _POWER_TOL, _POWER_MAX_ITER)
        if not ok:
            lam = _gelfand_radius(S, _POWER_TOL)  # PSD: radius = lambda_max
        return math.sqrt(max(lam, 0.0))
    lam, _, ok = _power_iteration(M, _POWER_TOL, _POWER_MAX_ITER)
    if ok:
        return abs(lam)
    return _gelfand_radius(M, _POWER_TOL)


# ---------------------------------------------------------------------------
# tau and test statistics


def tau(
    spec: ModelSpec,
    theta: Params,
    mu: MomentVector,
    m: int,
    mode: SpectralMode = SpectralMode.RADIUS,
) -> float:
    """Moment-condition functional: spectral value of E[A(theta, eta)^(x)m]."""
    return spectral_value(expected_kron(spec, theta, mu, m), mode)


def closed_form_garch11(alpha: float, beta: float, mu: MomentVector, m: int) -> float:
    """GARCH(1,1) tau in closed form: sum_k C(m,k) alpha^k beta^(m-k) mu_2k.

    E[A^(x)m] is rank one for p = q = 1, so its single nonzero eigenvalue is
    available as a binomial sum (mu_0 = 1).
    """
    if alpha < 0 or beta < 0:
        raise ParameterError("alpha and beta must be nonnegative")
    if mu.m < m:
        raise ParameterError(f"moment vector covers m={mu.m}, need m={m}")
    total = 0.0
    for k in range(m + 1):
        mu2k = 1.0 if k == 0 else mu.mu[k - 1]
        total += math.comb(m, k) * alpha**k * beta ** (m - k) * mu2k
    return total


def closed_form_garch11_gradient(alpha: float, beta: float, mu: MomentVector, m: int):
    """Analytic gradient of :func:`closed_form_garch11` in (alpha, beta, mu).

    Returns (d_alpha, d_beta, d_mu) with d_mu of length m; the tau value does
    not depend on omega.
    """
    if mu.m < m:
        raise ParameterError(f"moment vector covers m={mu.m}, need m={m}")
    d_alpha = 0.0
    d_beta = 0.0
    d_mu = np.empty(m)
    for k in range(m + 1):
        mu2k = 1.0 if k == 0 else mu.mu[k - 1]
        c = math.comb(m, k)
        if k >= 1:
            d_alpha += c * k * alpha ** (k - 1) * beta ** (m - k) * mu2k
            d_mu[k - 1] = c * alpha**k * beta ** (m - k)
        if m - k >= 1:
            d_beta += c * (m - k) * alpha**k * beta ** (m - k - 1) * mu2k
    return d_alpha, d_beta, d_mu


def test_statistic(
    spec: ModelSpec,
    theta: Params,
    resid,
    m: int,
    mode: SpectralMode = SpectralMode.RADIUS,
) -> float:
    """Spectral value of the residual-averaged Kronecker powers of A.

    For single-transform families this equals tau at the empirical moments
    (linearity); for T-GARCH/GJR-GARCH the average is formed directly.
    """
    resid = np.asarray(resid, dtype=float).reshape(-1)
    if resid.shape[0] < 1:
        raise ParameterError("residual sample must be nonempty")
    if spec.family in SINGLE_TRANSFORM_FAMILIES:
        return tau(spec, theta, estimate_moments(resid, spec, m), m, mode)
    _check_dim_cap(spec.a_dim, m)
    acc = np.zeros((spec.a_dim**m, spec.a_dim**m))
    for eta in resid:
        acc += kron_power(build_A(spec, theta, eta), m)
    return spectral_value(acc / resid.shape[0], mode)


# ---------------------------------------------------------------------------
# Gradient of tau (used by the constrained fit and the GARCH(1,1) Wald form)


def tau_value_gradient(
    spec: ModelSpec,
    theta: Params,
    mu: MomentVector,
    m: int,
    mode: SpectralMode = SpectralMode.RADIUS,
):
    """tau together with d tau / d theta, ordered (omega, alpha..., beta...).

    The omega slot of the gradient is zero (tau never depends on the
    intercept).  GARCH(1,1) uses the closed form; otherwise Radius mode uses
    the simple-eigenvalue derivative w'(dM)v / (w'v) with Perron vectors v, w
    and one-sided differences on the matrix construction, falling back to
    central differences on tau itself if the eigen-pair is ill-conditioned.
    Norm mode always differences tau directly.
    """
    theta.validate(spec)
    grad = np.zeros(spec.n_params)
    if spec.family is Family.GARCH and spec.p == 1 and spec.q == 1 and mode is SpectralMode.RADIUS:
        value = closed_form_garch11(float(theta.alpha[0]), float(theta.beta[0]), mu, m)
        d_alpha, d_beta, _ = closed_form_garch11_gradient(
            float(theta.alpha[0]), float(theta.beta[0]), mu, m
        )
        grad[1], grad[2] = d_alpha, d_beta
        return value, grad

    x = theta.to_array()

    def tau_at(vec):
        return tau(spec, Params.from_array(vec, spec), mu, m, mode)

    def fd_on_tau(i):
        h = 1e-7 * (1.0 + abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] = max(xm[i] - h, 0.0)
        return (tau_at(xp) - tau_at(xm)) / (xp[i] - xm[i])

    M = expected_kron(spec, theta, mu, m)
    use_eigen = False
    if mode is SpectralMode.RADIUS:
        lam, v, ok_v = _power_iteration(M, _POWER_TOL, _POWER_MAX_ITER)
        _, w, ok_w = _power_iteration(M.T, _POWER_TOL, _POWER_MAX_ITER)
        wv = float(w @ v) if (ok_v and ok_w) else 0.0
        use_eigen = ok_v and ok_w and abs(wv) > 1e-10
        value = abs(lam) if ok_v else _gelfand_radius(M, _POWER_TOL)
    else:
        value = spectral_value(M, mode)

    for i in range(1, spec.n_params):
        if not use_eigen:
            grad[i] = fd_on_tau(i)
            continue
        h = 1e-7 * (1.0 + abs(x[i]))
        xp = x.copy()
        xp[i] += h
        dM = (expected_kron(spec, Params.from_array(xp, spec), mu, m) - M) / h
        grad[i] = float(w @ dM @ v) / wv
    return value, grad


def tau_gradient(
    spec: ModelSpec,
    theta: Params,
    mu: MomentVector,
    m: int,
    mode: SpectralMode = SpectralMode.RADIUS,
) -> np.ndarray:
    """d tau / d theta, ordered (omega, alpha..., beta...); the omega slot is 0."""
    return tau_value_gradient(spec, theta, mu, m, mode)[1]
