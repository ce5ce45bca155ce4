"""Piecewise-constant ellipse phantoms and their exact Radon transforms."""

import csv
from dataclasses import dataclass

import numpy as np

from .cubature import CubatureRule
from .svd_basis import analyze_polar

# (cx, cy, a, b, phi in degrees, density)
_SHEPP_LOGAN = [
    (0.0, 0.0, 0.69, 0.92, 0.0, 2.0),
    (0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98),
    (0.22, 0.0, 0.11, 0.31, -18.0, -0.02),
    (-0.22, 0.0, 0.16, 0.41, 18.0, -0.02),
    (0.0, 0.35, 0.21, 0.25, 0.0, 0.01),
    (0.0, 0.1, 0.046, 0.046, 0.0, 0.01),
    (0.0, -0.1, 0.046, 0.046, 0.0, 0.01),
    (-0.08, -0.605, 0.046, 0.023, 0.0, 0.01),
    (0.0, -0.605, 0.023, 0.023, 0.0, 0.01),
    (0.06, -0.605, 0.023, 0.046, 0.0, 0.01),
]

# higher-contrast densities on the same geometry
_MODIFIED_DENSITIES = [1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]

VARIANTS = ("original", "modified")


@dataclass(frozen=True)
class Ellipse:
    """Indicator of an ellipse times ``density``.

    ``phi`` is the counter-clockwise rotation of the ``a`` axis, in degrees.
    """

    cx: float
    cy: float
    a: float
    b: float
    phi: float
    density: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"semi-axes must be positive, got a={self.a}, b={self.b}")
        t = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
        x, y = self.boundary(t)
        if np.max(x * x + y * y) > 1 + 1e-9:
            raise ValueError("ellipse must lie inside the closed unit disk")

    @property
    def rotation(self):
        return np.deg2rad(self.phi)

    def boundary(self, t):
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        u, v = self.a * np.cos(t), self.b * np.sin(t)
        return self.cx + c * u - s * v, self.cy + s * u + c * v

    def contains(self, x, y):
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        dx, dy = np.asarray(x) - self.cx, np.asarray(y) - self.cy
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return (u / self.a) ** 2 + (v / self.b) ** 2 <= 1.0

    def radon(self, theta, s):
        """Exact line integral over ``{x : <x, (cos theta, sin theta)> = s}``."""
        theta, s = np.broadcast_arrays(np.asarray(theta, float), np.asarray(s, float))
        sp = s - (self.cx * np.cos(theta) + self.cy * np.sin(theta))
        tp = theta - self.rotation
        A2 = (self.a * np.cos(tp)) ** 2 + (self.b * np.sin(tp)) ** 2
        chord = np.sqrt(np.clip(A2 - sp * sp, 0.0, None))
        return self.density * 2 * self.a * self.b / A2 * chord


@dataclass(frozen=True)
class Phantom:
    ellipses: tuple

    def __post_init__(self):
        object.__setattr__(self, "ellipses", tuple(self.ellipses))
        if not self.ellipses:
            raise ValueError("a phantom needs at least one ellipse")

    def __len__(self):
        return len(self.ellipses)

    def scaled(self, factor):
        """Same geometry with every density multiplied by ``factor``."""
        return Phantom([Ellipse(e.cx, e.cy, e.a, e.b, e.phi, e.density * factor)
                        for e in self.ellipses])


def shepp_logan(variant="original", scale=1.0):
    """The 10-ellipse Shepp-Logan head phantom.

    ``variant="modified"`` swaps in the high-contrast densities.  ``scale``
    multiplies all densities.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    rows = _SHEPP_LOGAN
    if variant == "modified":
        rows = [r[:5] + (d,) for r, d in zip(rows, _MODIFIED_DENSITIES)]
    ph = Phantom([Ellipse(*r) for r in rows])
    return ph if scale == 1.0 else ph.scaled(scale)


def phantom_eval(ph, x, y):
    """Sum of the densities of the ellipses containing ``(x, y)``."""
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    out = np.zeros(x.shape)
    for e in ph.ellipses:
        out += np.where(e.contains(x, y), e.density, 0.0)
    return out if out.ndim else float(out)


def phantom_radon_analytic(ph, theta, s):
    """Closed-form Radon transform of the phantom at ``(theta, s)``, ``|s| <= 1``."""
    s_arr = np.asarray(s, float)
    if np.any(np.abs(s_arr) > 1):
        raise ValueError("|s| must be <= 1")
    out = sum(e.radon(theta, s_arr) for e in ph.ellipses)
    return out if np.ndim(out) else float(out)


def membership_breakpoints(ph, theta, s, tol=1e-14):
    """Parameters ``t`` along the line ``s e_theta + t e_theta^perp`` at which
    the line crosses an ellipse boundary.

    Found by bisection on the membership indicator only, so the result does
    not depend on the chord formula used by :func:`phantom_radon_analytic`.
    """
    half = np.sqrt(max(0.0, 1 - s * s))
    e1 = np.array([np.cos(theta), np.sin(theta)])
    e2 = np.array([-np.sin(theta), np.cos(theta)])
    ts = np.linspace(-half, half, 4097)
    pts = s * e1[None, :] + ts[:, None] * e2[None, :]
    out = []
    for e in ph.ellipses:
        inside = e.contains(pts[:, 0], pts[:, 1])
        for idx in np.nonzero(inside[1:] != inside[:-1])[0]:
            lo, hi = ts[idx], ts[idx + 1]
            state = inside[idx]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                p = s * e1 + mid * e2
                if e.contains(p[0], p[1]) == state:
                    lo = mid
                else:
                    hi = mid
            out.append(0.5 * (lo + hi))
    return sorted(out)


def project_coefficients(ph, K, rule):
    """SVD coefficients ``c_{k,l,i} = sum_nodes w f(node) f_{k,l,i}(node)``.

    The phantom is discontinuous, so the rule must be exact to degree
    ``4 K`` at least.
    """
    if not isinstance(rule, CubatureRule):
        raise TypeError("rule must be a CubatureRule")
    if rule.exact_degree < 4 * K:
        raise ValueError(
            f"projection to degree {K} needs a rule exact to degree >= {4 * K}, "
            f"got {rule.exact_degree}")
    x, y = rule.grid()
    values = phantom_eval(ph, x, y)
    return analyze_polar(values, rule.radii, rule.radial_weights, rule.n_theta, K)


def load_phantom_csv(path):
    """Read ``cx,cy,a,b,phi,density`` rows (``phi`` in degrees)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    fields = ("cx", "cy", "a", "b", "phi", "density")
    try:
        return Phantom([Ellipse(*(float(r[f]) for f in fields)) for r in rows])
    except KeyError as exc:
        raise ValueError(f"phantom CSV is missing column {exc}") from None


def save_phantom_csv(ph, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cx", "cy", "a", "b", "phi", "density"])
        for e in ph.ellipses:
            w.writerow([repr(v) for v in (e.cx, e.cy, e.a, e.b, e.phi, e.density)])
