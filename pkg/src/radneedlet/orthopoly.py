"""Jacobi and Gegenbauer polynomials.

Evaluation uses the forward three-term recurrences; normalization
constants are computed in log space so that degrees in the thousands do
not overflow.
"""

import numpy as np
from scipy.special import gammaln


def _check_jacobi(alpha, beta):
    if alpha <= -1 or beta <= -1:
        raise ValueError(
            f"Jacobi parameters must satisfy alpha, beta > -1, got ({alpha}, {beta})")


def _check_gegenbauer(lam):
    if lam <= -0.5 or lam == 0:
        raise ValueError(f"Gegenbauer parameter must be > -1/2 and nonzero, got {lam}")


def jacobi_table(nmax, alpha, beta, t, scale=None):
    """All Jacobi polynomials ``P_0 .. P_nmax`` at the points ``t``.

    Parameters
    ----------
    nmax : int
        Highest degree (inclusive).
    alpha, beta : float
        Jacobi parameters, both > -1.
    t : array_like
        Evaluation points.
    scale : array_like, optional
        Factor multiplied into every row. The recurrence is linear, so
        seeding it with ``scale`` keeps products such as ``r**l * P_n``
        finite where ``P_n`` alone would overflow.

    Returns
    -------
    ndarray, shape (nmax + 1,) + t.shape
    """
    _check_jacobi(alpha, beta)
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    t = np.asarray(t, dtype=float)
    p0 = np.ones_like(t) if scale is None else np.broadcast_to(
        np.asarray(scale, dtype=float), t.shape).copy()
    out = np.empty((nmax + 1,) + t.shape)
    out[0] = p0
    if nmax == 0:
        return out
    ab = alpha + beta
    out[1] = p0 * ((alpha + 1) + (ab + 2) * (t - 1) / 2)
    for n in range(2, nmax + 1):
        c = 2 * n + ab
        a1 = 2 * n * (n + ab) * (c - 2)
        b1 = (c - 1) * c * (c - 2)
        b0 = (c - 1) * (alpha * alpha - beta * beta)
        c1 = 2 * (n + alpha - 1) * (n + beta - 1) * c
        out[n] = ((b1 * t + b0) * out[n - 1] - c1 * out[n - 2]) / a1
    return out


def jacobi_eval(n, alpha, beta, t):
    """Jacobi polynomial ``P_n^{(alpha, beta)}(t)``, normalized by
    ``P_n(1) = binom(n + alpha, n)``."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    out = jacobi_table(n, alpha, beta, t)[n]
    return float(out) if out.ndim == 0 else out


def jacobi_norm(n, alpha, beta):
    """Squared L2 norm ``h_n`` of ``P_n^{(alpha, beta)}`` under the weight
    ``(1 - t)**alpha * (1 + t)**beta`` on [-1, 1]."""
    _check_jacobi(alpha, beta)
    ab = alpha + beta
    log_h = (ab + 1) * np.log(2.0) + gammaln(n + alpha + 1) + gammaln(n + beta + 1) \
        - gammaln(n + 1)
    if n == 0:
        # (ab + 1) * Gamma(ab + 1) = Gamma(ab + 2), also fine at ab = -1
        log_h -= gammaln(ab + 2)
    else:
        log_h -= np.log(2 * n + ab + 1) + gammaln(n + ab + 1)
    return float(np.exp(log_h))


def gegenbauer_table(nmax, lam, t):
    """All Gegenbauer polynomials ``C_0^lam .. C_nmax^lam`` at ``t``."""
    _check_gegenbauer(lam)
    t = np.asarray(t, dtype=float)
    out = np.empty((nmax + 1,) + t.shape)
    out[0] = 1.0
    if nmax == 0:
        return out
    out[1] = 2 * lam * t
    for n in range(1, nmax):
        out[n + 1] = (2 * (n + lam) * t * out[n] - (n + 2 * lam - 1) * out[n - 1]) / (n + 1)
    return out


def gegenbauer_eval(n, lam, t):
    """Gegenbauer polynomial ``C_n^lam(t)``."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    out = gegenbauer_table(n, lam, t)[n]
    return float(out) if out.ndim == 0 else out


def gegenbauer_norm(n, lam):
    """Squared norm of ``C_n^lam`` under the weight ``(1 - t**2)**(lam - 1/2)``."""
    _check_gegenbauer(lam)
    log_h = (1 - 2 * lam) * np.log(2.0) + np.log(np.pi) - 2 * gammaln(lam) \
        + gammaln(n + 2 * lam) - np.log(n + lam) - gammaln(n + 1)
    return float(np.exp(log_h))
