"""Fast numerical self-checks behind ``radneedlet selftest``.

Each check is a small instance of an identity the library relies on; the
full-size versions live in the acceptance tests.
"""

import numpy as np

from .cubature import cubature_disk, disk_moment
from .estimator import EstimatorSpec, estimate, simulate_white_noise
from .needlet import frame_analyze, frame_synthesize
from .orthopoly import jacobi_norm
from .phantom import (
    membership_breakpoints,
    phantom_eval,
    phantom_radon_analytic,
    shepp_logan,
)
from .svd_basis import (
    CoefficientVector,
    enumerate_indices,
    eval_f,
    eval_g,
    n_coefficients,
    radon_forward_svd,
    radon_inverse_svd,
    radon_line_integral,
    singular_value,
)


def _svd_identity():
    worst = 0.0
    for idx in enumerate_indices(4):
        f = lambda x, y, idx=idx: eval_f(idx, np.hypot(x, y), np.arctan2(y, x))
        for th in (0.3, 2.1):
            for s in (-0.7, 0.1, 0.55):
                num = radon_line_integral(f, th, s)
                ref = singular_value(idx.k) * eval_g(idx, th, s)
                worst = max(worst, abs(num - ref) / max(1.0, abs(ref)))
    return worst, 1e-8


def _round_trip():
    rng = np.random.default_rng(0)
    c = CoefficientVector(16, rng.standard_normal(n_coefficients(16)))
    return float(np.abs(radon_inverse_svd(radon_forward_svd(c)).values - c.values).max()), 1e-12


def _cubature():
    rule = cubature_disk(16)
    worst = 0.0
    for a in range(17):
        for b in range(17 - a):
            ref = disk_moment(a, b)
            got = rule.integrate(rule.x**a * rule.y**b)
            worst = max(worst, abs(got - ref) / max(abs(ref), 1.0))
    return worst, 1e-12


def _parseval():
    rng = np.random.default_rng(1)
    c = CoefficientVector(15, rng.standard_normal(n_coefficients(15)))
    beta = frame_analyze(c, 4)
    rel = abs(beta.energy() - np.sum(c.values**2)) / np.sum(c.values**2)
    back = frame_synthesize(beta, 15)
    return max(rel, float(np.abs(back.values - c.values).max())), 1e-10


def _phantom_oracle():
    ph = shepp_logan()
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(10):
        th, s = rng.uniform(0, 2 * np.pi), rng.uniform(-0.9, 0.9)
        num = radon_line_integral(lambda x, y: phantom_eval(ph, x, y), th, s,
                                  breakpoints=membership_breakpoints(ph, th, s))
        ana = phantom_radon_analytic(ph, th, s)
        worst = max(worst, abs(num - ana) / abs(ana))
    return worst, 1e-6


def _zero_noise():
    rng = np.random.default_rng(3)
    c = CoefficientVector(32, rng.standard_normal(n_coefficients(32)))
    obs = simulate_white_noise(c, 0.0, 16)
    est = estimate(obs, EstimatorSpec.needlet(6))
    return float(np.abs(est.values - c.truncate(16).values).max()), 1e-12


CHECKS = [
    ("jacobi norm", lambda: (abs(jacobi_norm(0, 0, 0) - 2.0), 1e-15)),
    ("Radon SVD identity", _svd_identity),
    ("forward/inverse round trip", _round_trip),
    ("cubature moments", _cubature),
    ("tight frame", _parseval),
    ("phantom Radon oracle", _phantom_oracle),
    ("zero-noise needlet estimate", _zero_noise),
]


def run(verbose=True):
    """Run every check; returns the number of failures."""
    failures = 0
    for name, check in CHECKS:
        try:
            err, tol = check()
            ok = bool(err <= tol)
            detail = f"error {err:.3g} (tolerance {tol:g})"
        except Exception as exc:  # report, keep going
            ok, detail = False, f"raised {exc!r}"
        failures += not ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return failures

