"""Positive product cubature on the unit disk.

Gauss-Legendre in ``u = 2 r^2 - 1`` times a uniform angular grid.  Since
``dx = r dr dtheta = du dtheta / 4``, ``ceil((n + 1) / 2)`` radial nodes and
``n + 1`` angles integrate every bivariate polynomial of total degree <= n
exactly.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, roots_legendre


@dataclass(frozen=True)
class CubatureRule:
    radii: np.ndarray
    radial_weights: np.ndarray
    n_theta: int
    exact_degree: int

    @property
    def n_radial(self):
        return len(self.radii)

    @property
    def angles(self):
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def shape(self):
        return (self.n_radial, self.n_theta)

    def __len__(self):
        return self.n_radial * self.n_theta

    # flattened node arrays, ring-major
    @property
    def r(self):
        return np.repeat(self.radii, self.n_theta)

    @property
    def theta(self):
        return np.tile(self.angles, self.n_radial)

    @property
    def weights(self):
        return np.repeat(self.radial_weights * (2 * np.pi / self.n_theta), self.n_theta)

    @property
    def x(self):
        return self.r * np.cos(self.theta)

    @property
    def y(self):
        return self.r * np.sin(self.theta)

    def grid(self):
        """Nodes as ``(x, y)`` arrays of shape :attr:`shape`."""
        rr, tt = np.meshgrid(self.radii, self.angles, indexing="ij")
        return rr * np.cos(tt), rr * np.sin(tt)

    def weight_grid(self):
        return np.broadcast_to(
            (self.radial_weights * (2 * np.pi / self.n_theta))[:, None], self.shape)

    def integrate(self, values):
        """Cubature sum; ``values`` is flat (ring-major) or of :attr:`shape`.

        Extra leading axes are treated as a batch.
        """
        values = np.asarray(values, dtype=float)
        if values.shape[-2:] != self.shape:
            values = values.reshape(values.shape[:-1] + self.shape)
        w = self.radial_weights * (2 * np.pi / self.n_theta)
        return np.einsum("...rt,r->...", values, w)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("r,theta,weight\n")
            for row in zip(self.r, self.theta, self.weights):
                fh.write("%.17g,%.17g,%.17g\n" % row)


@lru_cache(maxsize=32)
def cubature_disk(exact_degree):
    """Product rule exact for polynomials of total degree <= ``exact_degree``."""
    n = int(exact_degree)
    if n < 0:
        raise ValueError("exact_degree must be >= 0")
    m_r = max(1, -(-(n + 1) // 2))
    u, wu = roots_legendre(m_r)
    radii = np.sqrt((1 + u) / 2)
    radii.flags.writeable = False
    wr = wu / 4
    wr.flags.writeable = False
    return CubatureRule(radii, wr, n + 1, n)


def disk_moment(a, b):
    """Closed form of the monomial moment ``int_{B^2} x^a y^b dx``."""
    if a % 2 or b % 2:
        return 0.0
    return float(2 * np.exp(gammaln((a + 1) / 2) + gammaln((b + 1) / 2)
                            - gammaln((a + b + 2) / 2)) / (a + b + 2))
