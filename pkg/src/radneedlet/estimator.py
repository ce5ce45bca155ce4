"""Noisy Radon observations and the linear needlet / SVD estimators.

Two observation models are supported.  In the white-noise model the SVD
coefficients of the sinogram are observed directly,
``y_{k,l,i} = lambda_k c_{k,l,i} + eps W_{k,l,i}``.  In the regression model
``Rf`` is sampled on the fan-beam grid

    Y_{i1,i2} = Rf(2 pi (i1/N1 - i2/N2), sin(2 pi i2/N2)) + noise,

and the coefficients are recovered by a Riemann sum.  Every estimator is a
multiplier on the recovered coefficients divided by ``lambda_k``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .needlet import _as_cutoff, gamma_table, level_rule
from .orthopoly import gegenbauer_norm, gegenbauer_table
from .phantom import phantom_radon_analytic
from .svd_basis import (
    CoefficientVector,
    harmonic_constant,
    index_arrays,
    index_rank,
    radon_forward_svd,
    radon_synthesize,
    singular_value,
)

# -- random numbers --------------------------------------------------------


def standard_normals(seed, stream, n):
    """``n`` standard normals, the ``m``-th depending only on ``(seed, stream, m)``.

    A Philox stream keyed by ``(seed, stream)`` produces one 53-bit uniform
    per index, mapped through the normal quantile.  Draw ``m`` is therefore
    the same whatever ``n`` is, and realizations can be generated in any
    order or in parallel.
    """
    bits = np.random.Philox(np.random.SeedSequence([int(seed), int(stream)]))
    u = np.random.Generator(bits).integers(0, 2**53, size=n, dtype=np.int64)
    return ndtri((u + 0.5) / 2.0**53)


# -- observations -----------------------------------------------------------


@dataclass
class WhiteNoiseObservation:
    y: CoefficientVector
    epsilon: float
    k0: int
    seed: int = 0
    realization: int = 0

    def __post_init__(self):
        if self.y.max_degree != self.k0:
            raise ValueError("observation degree must equal k0")


@dataclass
class RegressionObservation:
    Y: np.ndarray
    sigma: float
    N1: int
    N2: int
    seed: int = 0
    realization: int = 0

    def __post_init__(self):
        if self.N1 < 1 or self.N2 < 1:
            raise ValueError("N1 and N2 must be >= 1")
        self.Y = np.asarray(self.Y, dtype=float)
        if self.Y.shape != (self.N1, self.N2):
            raise ValueError(f"Y must have shape ({self.N1}, {self.N2}), got {self.Y.shape}")

    @property
    def epsilon(self):
        """Equivalent white-noise level, ``eps^2 = sigma^2 / (N1 N2)``."""
        return self.sigma / np.sqrt(self.N1 * self.N2)


def simulate_white_noise(c_true, epsilon, k0, seed=0, realization=0):
    """``y = lambda_k c_{k,l,i} + epsilon W_{k,l,i}`` for all ``k <= k0``."""
    if c_true.max_degree < k0:
        raise ValueError(f"true coefficients have degree {c_true.max_degree} < k0 = {k0}")
    y = radon_forward_svd(c_true.truncate(k0))
    if epsilon:
        y.values += epsilon * standard_normals(seed, realization, len(y))
    return WhiteNoiseObservation(y, float(epsilon), int(k0), seed, realization)


def regression_grid(N1, N2):
    """``(theta, s)`` arrays of shape ``(N1, N2)`` for the fan-beam sampling plan."""
    i1 = np.arange(N1)[:, None]
    i2 = np.arange(N2)[None, :]
    theta = 2 * np.pi * (i1 / N1 - i2 / N2)
    s = np.broadcast_to(np.sin(2 * np.pi * i2 / N2), theta.shape)
    return theta, s


def analytic_sampler(ph):
    """Radon sampler from the closed-form ellipse chords."""
    return lambda theta, s: phantom_radon_analytic(ph, theta, np.clip(s, -1.0, 1.0))


def svd_sampler(c):
    """Radon sampler from an SVD expansion ``sum lambda_k c g``."""
    y = radon_forward_svd(c)
    return lambda theta, s: radon_synthesize(y, theta, np.clip(s, -1.0, 1.0))


def simulate_regression(radon_sampler, N1, N2, sigma, seed=0, realization=0, clean=None):
    """Sample ``Rf`` on the fan-beam grid and add ``N(0, sigma^2)`` noise.

    ``clean`` may pass precomputed noiseless samples to skip the sampler.
    """
    if clean is None:
        theta, s = regression_grid(N1, N2)
        clean = np.asarray(radon_sampler(theta, s), dtype=float)
    Y = np.array(clean, dtype=float, copy=True)
    if sigma:
        Y += sigma * standard_normals(seed, realization, N1 * N2).reshape(N1, N2)
    return RegressionObservation(Y, float(sigma), int(N1), int(N2), seed, realization)


# -- Riemann sums -----------------------------------------------------------


def riemann_sums(Y, K):
    """The plain grid average ``(1/(N1 N2)) sum g_{k,l,i}(theta, s) Y`` for ``k <= K``.

    The angle ``theta(i1, i2)`` is a shifted uniform grid in ``i1``, so the
    sum over ``i1`` is one FFT followed by a phase shift per column.
    """
    Y = np.asarray(Y, dtype=float)
    N1, N2 = Y.shape[-2:]
    s = np.sin(2 * np.pi * np.arange(N2) / N2)
    hk = np.array([gegenbauer_norm(k, 1.0) for k in range(K + 1)])
    G = gegenbauer_table(K, 1.0, s) * (np.sqrt(np.clip(1 - s * s, 0.0, None))
                                       / np.sqrt(hk)[:, None])
    F = N1 * np.fft.ifft(Y, axis=-2)
    phase = 2 * np.pi * np.arange(N2) / N2
    out = np.zeros(Y.shape[:-2] + (index_arrays(K)[0].size,))
    for l in range(K + 1):
        ks = np.arange(l, K + 1, 2)
        Z = F[..., l % N1, :] * np.exp(-1j * l * phase)
        cl = harmonic_constant(l) / (N1 * N2)
        out[..., index_rank(ks, l, 1)] = cl * (Z.real @ G[ks].T)
        if l:
            out[..., index_rank(ks, l, 2)] = cl * (Z.imag @ G[ks].T)
    return out


@lru_cache(maxsize=64)
def riemann_calibration(N1, N2):
    """Global factor turning the grid average into ``<Rf, g>``.

    Measured once at ``k = 0``: for ``f = f_{0,0,1}`` the exact value of
    ``<Rf, g_{0,0,1}>`` is ``lambda_0``.
    """
    theta, s = regression_grid(N1, N2)
    g0 = np.sqrt(np.clip(1 - s * s, 0.0, None)) / np.sqrt(gegenbauer_norm(0, 1.0)) \
        * harmonic_constant(0)
    raw = riemann_sums(singular_value(0) * g0, 0)[0]
    return float(singular_value(0) / raw)


def riemann_svd_coeffs(obs, K):
    """Estimated ``<Rf, g_{k,l,i}>`` for ``k <= K`` from a regression observation."""
    vals = riemann_calibration(obs.N1, obs.N2) * riemann_sums(obs.Y, K)
    return CoefficientVector(K, vals)


# -- estimators -------------------------------------------------------------


@dataclass(frozen=True)
class EstimatorSpec:
    """``needlet`` (level ``J``), ``svd`` (degree ``kS``) or ``naive``."""

    kind: str
    J: int = None
    kS: int = None
    cutoff: str = "smooth_exp"

    def __post_init__(self):
        if self.kind == "needlet":
            if self.J is None or int(self.J) != self.J or self.J < 0:
                raise ValueError(f"needlet level J must be an integer >= 0, got {self.J}")
            _as_cutoff(self.cutoff)
        elif self.kind == "svd":
            if self.kS is None or int(self.kS) != self.kS or self.kS < 0:
                raise ValueError(f"SVD degree kS must be an integer >= 0, got {self.kS}")
        elif self.kind != "naive":
            raise ValueError(f"unknown estimator kind {self.kind!r}")

    @classmethod
    def needlet(cls, J, cutoff="smooth_exp"):
        return cls("needlet", J=J, cutoff=cutoff)

    @classmethod
    def svd(cls, kS):
        return cls("svd", kS=kS)

    @classmethod
    def naive(cls):
        return cls("naive")

    @property
    def tuning(self):
        return {"needlet": self.J, "svd": self.kS, "naive": None}[self.kind]

    def label(self):
        if self.kind == "needlet":
            return f"needlet(J={self.J})"
        return f"svd(kS={self.kS})" if self.kind == "svd" else "naive"

    def degree_weights(self, k0):
        """Multiplier applied to degree ``k`` before dividing by ``lambda_k``."""
        k = np.arange(k0 + 1)
        if self.kind == "needlet":
            return _as_cutoff(self.cutoff).a(k / 2.0**self.J)
        if self.kind == "svd":
            if self.kS > k0:
                raise ValueError(f"kS = {self.kS} exceeds the observed degree k0 = {k0}")
            return (k <= self.kS).astype(float)
        return np.ones(k0 + 1)


def inverse_weights(spec, k0):
    """Per-coefficient factor ``weight(k) / lambda_k`` up to degree ``k0``."""
    k = index_arrays(k0)[0]
    per_degree = spec.degree_weights(k0) / singular_value(np.arange(k0 + 1))
    return per_degree[k]


def observed_coefficients(obs, k0=None):
    """Sinogram-side coefficients of either observation type."""
    if isinstance(obs, WhiteNoiseObservation):
        return obs.y
    K = min(obs.N1, obs.N2) // 2 if k0 is None else k0
    return riemann_svd_coeffs(obs, K)


def estimate(obs, spec, k0=None):
    """Image-side coefficients of the estimate.

    For regression observations ``k0`` sets the recovered degree (default
    ``min(N1, N2) // 2``).
    """
    y = observed_coefficients(obs, k0)
    K = y.max_degree
    return CoefficientVector(K, inverse_weights(spec, K) * y.values)


def smoothing_order(spec):
    """Sort key: smaller means more smoothing."""
    return (spec.tuning if spec.tuning is not None else np.inf)


def select_best(make_observation, candidates, error, R=50, k0=None):
    """Oracle tuning: the candidate with the smallest mean error over ``R`` realizations.

    ``make_observation(r)`` returns realization ``r``; ``error`` maps an
    estimate to a loss.  Ties go to the candidate with more smoothing.
    Returns ``(best_spec, best_mean, {spec: (mean, std)})``.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    errs = {c: [] for c in candidates}
    for r in range(R):
        obs = make_observation(r)
        for c in candidates:
            errs[c].append(error(estimate(obs, c, k0)))
    table = {c: (float(np.mean(v)), float(np.std(v, ddof=1)) if R > 1 else 0.0)
             for c, v in errs.items()}
    best = pick_best({c: m for c, (m, _) in table.items()})
    return best, table[best][0], table


def pick_best(means):
    """Argmin of ``{spec: mean}`` with ties broken toward more smoothing."""
    order = sorted(means, key=smoothing_order)
    best = order[0]
    for c in order[1:]:
        if means[c] < means[best]:
            best = c
    return best


# -- noise of needlet coefficients -------------------------------------------


@dataclass
class SigmaBoundReport:
    j: int
    epsilon: float
    trials: int
    radii: np.ndarray
    empirical: np.ndarray = field(repr=False)
    exact: np.ndarray = field(repr=False)
    bound: float = 0.0

    @property
    def max_empirical(self):
        return float(self.empirical.max()) if self.empirical.size else 0.0

    @property
    def holds(self):
        return bool(self.max_empirical <= 1.5 * self.bound)


def empirical_sigma_bound(j, epsilon, trials=10_000, seed=0, cutoff="smooth_exp"):
    """Monte-Carlo variance of ``Z_{j,xi} = sum gamma (eps / lambda_k) W``.

    One father needlet per ring of the level-``j`` rule is simulated; the
    variance is invariant under the rotations mapping a ring onto itself.
    ``bound`` is ``2^j eps^2 / pi``.
    """
    K = 2**j  # a hard cut-off keeps k = 2^j; smooth ones vanish there
    gam = gamma_table(j, K, "father", cutoff)
    rule = level_rule(j)
    rows = np.arange(rule.n_radial) * rule.n_theta
    coef = gam[rows] * (epsilon / singular_value(index_arrays(K)[0]))[None, :]
    n = coef.shape[1]
    W = standard_normals(seed, j, trials * n).reshape(trials, n)
    Z = W @ coef.T
    return SigmaBoundReport(
        j=j, epsilon=float(epsilon), trials=int(trials), radii=rule.radii.copy(),
        empirical=Z.var(axis=0, ddof=1), exact=np.sum(coef * coef, axis=1),
        bound=float(2.0**j * epsilon**2 / np.pi))
