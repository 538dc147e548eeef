"""Numba kernels for the sequential volatility recursions.

All kernels work on the squared-volatility scale of ARCH/GARCH models.
Presample squared observations enter as the constant ``pre_eps2``; presample
sigma^2 values are the implied fixed point of the recursion under constant
presample observations, which keeps the parameter-scaling identity exact, so
they are theta-dependent and carry the gradient ``dpre``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def garch_filter(eps, q, p, omega, alpha, beta, pre_eps2, pre_sig2, floor):
    """Filtered sigma_t^2 for the GARCH(p,q) recursion, truncated initial conditions."""
    n = eps.shape[0]
    sig2 = np.empty(n)
    for t in range(n):
        v = omega
        for i in range(1, q + 1):
            e2 = eps[t - i] * eps[t - i] if t - i >= 0 else pre_eps2
            v += alpha[i - 1] * e2
        for j in range(1, p + 1):
            s2 = sig2[t - j] if t - j >= 0 else pre_sig2
            v += beta[j - 1] * s2
        if v < floor:
            v = floor
        sig2[t] = v
    return sig2


@njit(cache=True)
def garch_filter_grad(eps, q, p, omega, alpha, beta, pre_eps2, pre_sig2, dpre, floor):
    """Filtered sigma_t^2 and its gradient w.r.t. theta = (omega, alpha, beta).

    dsig2[t] = (1, eps2_{t-1..t-q}, sig2_{t-1..t-p})' + sum_j beta_j * dsig2[t-j],
    with dsig2[t] = dpre for t <= 0.  Rows where the floor binds get zero
    gradient.
    """
    n = eps.shape[0]
    r = 1 + q + p
    sig2 = np.empty(n)
    dsig2 = np.zeros((n, r))
    for t in range(n):
        v = omega
        d = dsig2[t]
        d[0] = 1.0
        for i in range(1, q + 1):
            e2 = eps[t - i] * eps[t - i] if t - i >= 0 else pre_eps2
            v += alpha[i - 1] * e2
            d[i] = e2
        for j in range(1, p + 1):
            b = beta[j - 1]
            if t - j >= 0:
                v += b * sig2[t - j]
                d[q + j] = sig2[t - j]
                prev = dsig2[t - j]
                for k in range(r):
                    d[k] += b * prev[k]
            else:
                v += b * pre_sig2
                d[q + j] = pre_sig2
                for k in range(r):
                    d[k] += b * dpre[k]
        if v < floor:
            v = floor
            for k in range(r):
                d[k] = 0.0
        sig2[t] = v
    return sig2, dsig2


@njit(cache=True)
def kron_dense(X, A):
    """Kronecker product X (x) A, skipping zero entries of X."""
    nx = X.shape[0]
    na = A.shape[0]
    out = np.zeros((nx * na, nx * na))
    for i in range(nx):
        for j in range(nx):
            x = X[i, j]
            if x != 0.0:
                for k in range(na):
                    for l in range(na):
                        a = A[k, l]
                        if a != 0.0:
                            out[i * na + k, j * na + l] = x * a
    return out


@njit(cache=True)
def kron_add(out, X, A):
    """In-place out += X (x) A, skipping zero entries of X."""
    na = A.shape[0]
    for i in range(X.shape[0]):
        for j in range(X.shape[1]):
            x = X[i, j]
            if x != 0.0:
                for k in range(na):
                    for l in range(na):
                        a = A[k, l]
                        if a != 0.0:
                            out[i * na + k, j * na + l] += x * a
    return out


@njit(cache=True)
def garch_simulate(eta, q, p, omega, alpha, beta, init):
    """Simulate (eps, sigma2) from the GARCH(p,q) recursion.

    All presample eps^2 and sigma^2 lags start at `init`.
    """
    n = eta.shape[0]
    eps = np.empty(n)
    sig2 = np.empty(n)
    for t in range(n):
        v = omega
        for i in range(1, q + 1):
            e2 = eps[t - i] * eps[t - i] if t - i >= 0 else init
            v += alpha[i - 1] * e2
        for j in range(1, p + 1):
            s2 = sig2[t - j] if t - j >= 0 else init
            v += beta[j - 1] * s2
        sig2[t] = v
        eps[t] = np.sqrt(v) * eta[t]
    return eps, sig2
