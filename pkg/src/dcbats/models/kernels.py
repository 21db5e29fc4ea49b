"""Per-observation log-density and simulation kernels, dual-path.

Every kernel exists in a pure-numpy form and, when numba is importable, a
compiled form. The compiled path is the default; set ``DCBATS_PURE_NUMPY=1``
in the environment (before import) to force the numpy path, which is also
selected automatically when numba is missing. ``NUMPY_IMPLS`` and
``NUMBA_IMPLS`` keep both paths addressable for the benchmark and the
cross-path equivalence tests.

Kernels are deliberately free of validation and RNG state: callers pass
pre-validated float64 arrays and pre-drawn noise. Recursion kernels return
per-observation log-density terms so one pass serves both the full
log-likelihood (sum) and single-t conditionals (index). Kernels that must
assert variance positivity at runtime return an extra status flag
(0 = ok, 1 = positivity failure) instead of raising, which keeps them
nopython-compatible; wrappers translate the flag into an exception.
"""
from __future__ import annotations

import math
import os

import numpy as np

_LOG_2PI = math.log(2.0 * math.pi)

_flag = os.environ.get("DCBATS_PURE_NUMPY", "").strip().lower()
PURE_NUMPY_REQUESTED = _flag in {"1", "true", "yes", "on"}

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA and not PURE_NUMPY_REQUESTED


# ---------------------------------------------------------------------------
# loop sources: plain functions, njit-compiled below when numba is present


def _ar_error_terms_loop(x, zb, alpha, phi1, phi2, sigma_sq):
    # regression residuals follow an AR(2); the first two residuals are
    # fresh innovations, so their conditional mean has no AR terms
    T = x.shape[0]
    terms = np.empty(T)
    c0 = -0.5 * (_LOG_2PI + np.log(sigma_sq))
    inv2 = 0.5 / sigma_sq
    r_prev = 0.0
    r_prev2 = 0.0
    for t in range(T):
        r = x[t] - alpha - zb[t]
        if t >= 2:
            u = r - phi1 * r_prev - phi2 * r_prev2
        else:
            u = r
        terms[t] = c0 - inv2 * u * u
        r_prev2 = r_prev
        r_prev = r
    return terms


def _garch_terms_loop(eps, omega, alpha, beta, r_init):
    # sigma_t^2 = omega^2 + sum_i alpha_i eps_{t-i}^2 + sum_j beta_j sigma_{t-j}^2
    # with a unit-variance preamble of length r_init = max(p, q)
    T = eps.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    sig2 = np.empty(T)
    terms = np.empty(T)
    w2 = omega * omega
    for t in range(T):
        if t < r_init:
            s2 = 1.0
        else:
            s2 = w2
            for i in range(1, q + 1):
                s2 += alpha[i - 1] * eps[t - i] * eps[t - i]
            for j in range(1, p + 1):
                s2 += beta[j - 1] * sig2[t - j]
        if not s2 > 0.0:
            return terms, 1
        sig2[t] = s2
        terms[t] = -0.5 * (_LOG_2PI + np.log(s2) + eps[t] * eps[t] / s2)
    return terms, 0


def _binary_terms_loop(x, zb, c, alpha):
    # Bernoulli log-mass with logit c + sum_i alpha_i x_{t-i} + z_t.b
    # (x_s = 0 for s <= 0); log sigma terms via stable softplus
    T = x.shape[0]
    p = alpha.shape[0]
    terms = np.empty(T)
    for t in range(T):
        s = c + zb[t]
        lags = p if p < t else t
        for i in range(1, lags + 1):
            s += alpha[i - 1] * x[t - i]
        softplus = np.log1p(np.exp(-abs(s))) + (s if s > 0.0 else 0.0)
        terms[t] = x[t] * s - softplus
    return terms


def _ccc_terms_loop(v, w1, w2, a1, a2, b1, b2, rho):
    # diagonal GARCH(1,1) variances with constant cross-correlation rho;
    # h_1 starts at the stationary variance when a+b < 1, else at w
    T = v.shape[0]
    terms = np.empty(T)
    omr2 = 1.0 - rho * rho
    if not omr2 > 0.0:
        return terms, 1
    log_omr2 = np.log(omr2)
    h1 = w1 / (1.0 - a1 - b1) if a1 + b1 < 1.0 else w1
    h2 = w2 / (1.0 - a2 - b2) if a2 + b2 < 1.0 else w2
    for t in range(T):
        if t > 0:
            h1 = w1 + a1 * v[t - 1, 0] * v[t - 1, 0] + b1 * h1
            h2 = w2 + a2 * v[t - 1, 1] * v[t - 1, 1] + b2 * h2
        if not (h1 > 0.0 and h2 > 0.0):
            return terms, 1
        v1 = v[t, 0]
        v2 = v[t, 1]
        quad = (v1 * v1 / h1 - 2.0 * rho * v1 * v2 / np.sqrt(h1 * h2)
                + v2 * v2 / h2) / omr2
        terms[t] = (-_LOG_2PI - 0.5 * (np.log(h1) + np.log(h2) + log_omr2)
                    - 0.5 * quad)
    return terms, 0


def _kalman_terms_loop(x, A, sig_z2, sig_x2, Ax, mu0, cov0, cz, cx):
    # prediction-error decomposition; the filter starts from the latent
    # prior N(mu0, cov0) and every step contributes one Gaussian term.
    # All small-matrix algebra is unrolled into scalar loops so the same
    # source compiles under numba and runs as the numpy fallback.
    T = x.shape[0]
    n = A.shape[0]
    px = Ax.shape[0]
    terms = np.empty(T)
    m = mu0.copy()
    P = cov0.copy()
    m_pred = np.empty(n)
    P_pred = np.empty((n, n))
    AP = np.empty((n, n))
    AxP = np.empty((px, n))
    S = np.empty((px, px))
    L = np.empty((px, px))
    y = np.empty(px)
    v = np.empty(px)
    X = np.empty((px, n))
    for t in range(T):
        # predict: m <- A m + cz, P <- A P A' + sig_z2 I
        for i in range(n):
            acc = cz[i]
            for j in range(n):
                acc += A[i, j] * m[j]
            m_pred[i] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += A[i, k] * P[k, j]
                AP[i, j] = acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += AP[i, k] * A[j, k]
                P_pred[i, j] = acc
            P_pred[i, i] += sig_z2
        # innovation moments: v = x_t - Ax m - cx, S = Ax P Ax' + sig_x2 I
        for i in range(px):
            acc = cx[i]
            for j in range(n):
                acc += Ax[i, j] * m_pred[j]
            v[i] = x[t, i] - acc
        for i in range(px):
            for j in range(n):
                acc = 0.0
                for k in range(n):
                    acc += Ax[i, k] * P_pred[k, j]
                AxP[i, j] = acc
        for i in range(px):
            for j in range(px):
                acc = 0.0
                for k in range(n):
                    acc += AxP[i, k] * Ax[j, k]
                S[i, j] = acc
            S[i, i] += sig_x2
        # cholesky S = L L'; failure means S lost positive-definiteness
        ok = True
        for i in range(px):
            for j in range(i + 1):
                acc = S[i, j]
                for k in range(j):
                    acc -= L[i, k] * L[j, k]
                if i == j:
                    if not (acc > 0.0 and np.isfinite(acc)):
                        ok = False
                        break
                    L[i, i] = np.sqrt(acc)
                else:
                    L[i, j] = acc / L[j, j]
            if not ok:
                break
        if not ok:
            return terms, 1
        logdet_half = 0.0
        for i in range(px):
            acc = v[i]
            for j in range(i):
                acc -= L[i, j] * y[j]
            y[i] = acc / L[i, i]
            logdet_half += np.log(L[i, i])
        quad = 0.0
        for i in range(px):
            quad += y[i] * y[i]
        terms[t] = -0.5 * (px * _LOG_2PI + quad) - logdet_half
        # gain via two triangular solves: X = S^{-1} (Ax P), Kalman gain = X'
        for col in range(n):
            for i in range(px):
                acc = AxP[i, col]
                for j in range(i):
                    acc -= L[i, j] * X[j, col]
                X[i, col] = acc / L[i, i]
            for i in range(px - 1, -1, -1):
                acc = X[i, col]
                for j in range(i + 1, px):
                    acc -= L[j, i] * X[j, col]
                X[i, col] = acc / L[i, i]
        # update: m <- m + X' v, P <- P - X' (Ax P), then symmetrize
        for i in range(n):
            acc = 0.0
            for j in range(px):
                acc += X[j, i] * v[j]
            m[i] = m_pred[i] + acc
        for i in range(n):
            for j in range(n):
                acc = 0.0
                for k in range(px):
                    acc += X[k, i] * AxP[k, j]
                P[i, j] = P_pred[i, j] - acc
        for i in range(n):
            for j in range(i):
                avg = 0.5 * (P[i, j] + P[j, i])
                P[i, j] = avg
                P[j, i] = avg
    return terms, 0


def _ar_error_sim_loop(zb, alpha, phi1, phi2, sigma, noise):
    T = noise.shape[0]
    x = np.empty(T)
    e_prev = 0.0
    e_prev2 = 0.0
    for t in range(T):
        if t >= 2:
            e = phi1 * e_prev + phi2 * e_prev2 + sigma * noise[t]
        else:
            e = sigma * noise[t]
        x[t] = alpha + zb[t] + e
        e_prev2 = e_prev
        e_prev = e
    return x


def _garch_sim_loop(zb, omega, alpha, beta, r_init, noise):
    T = noise.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    eps = np.empty(T)
    sig2 = np.empty(T)
    x = np.empty(T)
    w2 = omega * omega
    for t in range(T):
        if t < r_init:
            s2 = 1.0
        else:
            s2 = w2
            for i in range(1, q + 1):
                s2 += alpha[i - 1] * eps[t - i] * eps[t - i]
            for j in range(1, p + 1):
                s2 += beta[j - 1] * sig2[t - j]
        sig2[t] = s2
        eps[t] = np.sqrt(s2) * noise[t]
        x[t] = zb[t] + eps[t]
    return x


def _binary_sim_loop(zb, c, alpha, uniforms):
    T = uniforms.shape[0]
    p = alpha.shape[0]
    x = np.empty(T)
    for t in range(T):
        s = c + zb[t]
        lags = p if p < t else t
        for i in range(1, lags + 1):
            s += alpha[i - 1] * x[t - i]
        if s >= 0.0:
            prob = 1.0 / (1.0 + np.exp(-s))
        else:
            es = np.exp(s)
            prob = es / (1.0 + es)
        x[t] = 1.0 if uniforms[t] < prob else 0.0
    return x


def _ccc_sim_loop(mu1, mu2, w1, w2, a1, a2, b1, b2, rho, noise):
    T = noise.shape[0]
    x = np.empty((T, 2))
    h1 = w1 / (1.0 - a1 - b1) if a1 + b1 < 1.0 else w1
    h2 = w2 / (1.0 - a2 - b2) if a2 + b2 < 1.0 else w2
    v1 = 0.0
    v2 = 0.0
    sr = np.sqrt(1.0 - rho * rho)
    for t in range(T):
        if t > 0:
            h1 = w1 + a1 * v1 * v1 + b1 * h1
            h2 = w2 + a2 * v2 * v2 + b2 * h2
        # 2x2 cholesky of [[h1, rho*sqrt(h1 h2)], [., h2]]
        v1 = np.sqrt(h1) * noise[t, 0]
        v2 = np.sqrt(h2) * (rho * noise[t, 0] + sr * noise[t, 1])
        x[t, 0] = mu1 + v1
        x[t, 1] = mu2 + v2
    return x


def _hmm_sim_loop(A, sig_z, sig_x, Ax, mu0, cov0_chol, cz, cx,
                  z0_noise, z_noise, x_noise):
    T = z_noise.shape[0]
    n = A.shape[0]
    px = Ax.shape[0]
    z = np.empty(n)
    z_new = np.empty(n)
    x = np.empty((T, px))
    for i in range(n):
        acc = mu0[i]
        for j in range(i + 1):
            acc += cov0_chol[i, j] * z0_noise[j]
        z[i] = acc
    for t in range(T):
        for i in range(n):
            acc = cz[i] + sig_z * z_noise[t, i]
            for j in range(n):
                acc += A[i, j] * z[j]
            z_new[i] = acc
        for i in range(n):
            z[i] = z_new[i]
        for i in range(px):
            acc = cx[i] + sig_x * x_noise[t, i]
            for j in range(n):
                acc += Ax[i, j] * z[j]
            x[t, i] = acc
    return x


# ---------------------------------------------------------------------------
# vectorized numpy alternates for the kernels where vectorizing is natural


def _ar_error_terms_vec(x, zb, alpha, phi1, phi2, sigma_sq):
    r = x - alpha - zb
    u = r.copy()
    if r.shape[0] > 2:
        u[2:] = r[2:] - phi1 * r[1:-1] - phi2 * r[:-2]
    c0 = -0.5 * (_LOG_2PI + np.log(sigma_sq))
    return c0 - (0.5 / sigma_sq) * u * u


def _binary_terms_vec(x, zb, c, alpha):
    T = x.shape[0]
    s = c + zb.copy()
    for i in range(1, alpha.shape[0] + 1):
        if i >= T + 1:
            break
        s[i:] += alpha[i - 1] * x[:-i]
    return x * s - np.logaddexp(0.0, s)


_LOOP_SOURCES = {
    "ar_error_terms": _ar_error_terms_loop,
    "garch_terms": _garch_terms_loop,
    "binary_terms": _binary_terms_loop,
    "ccc_terms": _ccc_terms_loop,
    "kalman_terms": _kalman_terms_loop,
    "ar_error_sim": _ar_error_sim_loop,
    "garch_sim": _garch_sim_loop,
    "binary_sim": _binary_sim_loop,
    "ccc_sim": _ccc_sim_loop,
    "hmm_sim": _hmm_sim_loop,
}

NUMPY_IMPLS = dict(_LOOP_SOURCES)
NUMPY_IMPLS["ar_error_terms"] = _ar_error_terms_vec
NUMPY_IMPLS["binary_terms"] = _binary_terms_vec

if HAVE_NUMBA:
    NUMBA_IMPLS = {
        name: njit(cache=True, nogil=True)(fn)
        for name, fn in _LOOP_SOURCES.items()
    }
else:
    NUMBA_IMPLS = None

_ACTIVE = NUMBA_IMPLS if USING_NUMBA else NUMPY_IMPLS

ar_error_terms = _ACTIVE["ar_error_terms"]
garch_terms = _ACTIVE["garch_terms"]
binary_terms = _ACTIVE["binary_terms"]
ccc_terms = _ACTIVE["ccc_terms"]
kalman_terms = _ACTIVE["kalman_terms"]
ar_error_sim = _ACTIVE["ar_error_sim"]
garch_sim = _ACTIVE["garch_sim"]
binary_sim = _ACTIVE["binary_sim"]
ccc_sim = _ACTIVE["ccc_sim"]
hmm_sim = _ACTIVE["hmm_sim"]


def warm_up():
    """Trigger compilation of the active kernels on tiny inputs.

    Calling this once before fanning out to worker threads keeps jit
    compilation out of the timed/parallel sections. A no-op on the
    numpy path.
    """
    z1 = np.zeros(3)
    z2 = np.zeros((3, 2))
    e2 = np.eye(2)
    ar_error_terms(z1, z1, 0.0, 0.1, 0.1, 1.0)
    garch_terms(z1, 1.0, np.array([0.1]), np.array([0.1]), 1)
    binary_terms(np.array([0.0, 1.0, 1.0]), z1, 0.0, np.array([0.1]))
    ccc_terms(z2, 1.0, 1.0, 0.1, 0.1, 0.1, 0.1, 0.2)
    kalman_terms(z2, e2, 1.0, 1.0, e2, np.zeros(2), e2, np.zeros(2), np.zeros(2))
    ar_error_sim(z1, 0.0, 0.1, 0.1, 1.0, z1)
    garch_sim(z1, 1.0, np.array([0.1]), np.array([0.1]), 1, z1)
    binary_sim(z1, 0.0, np.array([0.1]), np.full(3, 0.5))
    ccc_sim(0.0, 0.0, 1.0, 1.0, 0.1, 0.1, 0.1, 0.1, 0.2, z2)
    hmm_sim(e2, 1.0, 1.0, e2, np.zeros(2), e2, np.zeros(2), np.zeros(2),
            np.zeros(2), z2, z2)
