"""Singular value decomposition of the Radon transform on the unit disk.

The image-side basis is

    f_{k,l,i}(r, theta) = sqrt(2k + 2) P_j^{(0, l)}(2 r^2 - 1) r^l Y_{l,i}(theta),   k - l = 2j,

orthonormal in L2(B^2, dx), and the sinogram-side basis is

    g_{k,l,i}(theta, s) = h_k^{-1/2} (1 - s^2)^{1/2} C_k^1(s) Y_{l,i}(theta),

orthonormal in L2(dtheta ds / (1 - s^2)^{1/2}).  ``R f_{k,l,i} = lambda_k g_{k,l,i}``
pointwise, with ``lambda_k = 2 sqrt(pi) / sqrt(k + 1)``.

Angular harmonics are ``Y_{l,1} = c_l cos(l theta)`` and ``Y_{l,2} = c_l sin(l theta)``
with ``c_0 = 1/sqrt(2 pi)`` and ``c_l = 1/sqrt(pi)``; the index ``(l=0, i=2)`` does
not exist.
"""

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import poch, roots_legendre

from .orthopoly import gegenbauer_norm, gegenbauer_table, jacobi_table

_BINARY_MAGIC = b"RNCV"
_BINARY_VERSION = 1


@dataclass(frozen=True, order=True)
class SvdIndex:
    """Address ``(k, l, i)`` of one SVD basis pair."""

    k: int
    l: int
    i: int = 1

    def __post_init__(self):
        k, l, i = self.k, self.l, self.i
        if k < 0 or not 0 <= l <= k:
            raise ValueError(f"need 0 <= l <= k, got k={k}, l={l}")
        if (k - l) % 2:
            raise ValueError(f"k - l must be even, got k={k}, l={l}")
        if i not in (1, 2):
            raise ValueError(f"i must be 1 or 2, got {i}")
        if l == 0 and i == 2:
            raise ValueError("index (l=0, i=2) is identically zero and excluded")

    @property
    def j(self):
        return (self.k - self.l) // 2

    @property
    def rank(self):
        return index_rank(self.k, self.l, self.i)


def n_coefficients(K):
    """Number of basis functions of degree <= K, ``(K+1)(K+2)/2``."""
    return (K + 1) * (K + 2) // 2


def index_rank(k, l, i):
    """Position of ``(k, l, i)`` in the canonical (lexicographic) order.

    Works elementwise on integer arrays.
    """
    k, l, i = np.asarray(k), np.asarray(l), np.asarray(i)
    within = np.where(l == 0, 0, l - 1 + (i - 1))
    rank = k * (k + 1) // 2 + within
    return int(rank) if rank.ndim == 0 else rank


def enumerate_indices(K):
    """All indices of degree <= K, ordered by ``(k, l, i)``."""
    if K < 0:
        raise ValueError("K must be >= 0")
    out = []
    for k in range(K + 1):
        for l in range(k % 2, k + 1, 2):
            out.append(SvdIndex(k, l, 1))
            if l > 0:
                out.append(SvdIndex(k, l, 2))
    return out


@lru_cache(maxsize=16)
def _index_arrays(K):
    idx = enumerate_indices(K)
    k = np.array([t.k for t in idx], dtype=np.int64)
    l = np.array([t.l for t in idx], dtype=np.int64)
    i = np.array([t.i for t in idx], dtype=np.int64)
    for a in (k, l, i):
        a.flags.writeable = False
    return k, l, i


def index_arrays(K):
    """``(k, l, i)`` integer arrays in canonical order (read-only, cached)."""
    return _index_arrays(int(K))


def singular_value(k, d=2):
    """``lambda_k = sqrt(2^d pi^(d-1) / (k+1)_(d-1))``; vectorized in ``k``."""
    if d < 2:
        raise ValueError("dimension must be >= 2")
    k = np.asarray(k, dtype=float)
    lam = np.sqrt(2.0**d * np.pi ** (d - 1) / poch(k + 1, d - 1))
    return float(lam) if lam.ndim == 0 else lam


def harmonic_constant(l):
    """Normalization ``c_l`` of the angular harmonics."""
    l = np.asarray(l)
    c = np.where(l == 0, 1 / np.sqrt(2 * np.pi), 1 / np.sqrt(np.pi))
    return float(c) if c.ndim == 0 else c


class CoefficientVector:
    """Dense coefficients on the SVD basis up to degree ``max_degree``.

    Used on both sides of the Radon transform: ``<f, f_{k,l,i}>`` on the image
    side and ``<Rf, g_{k,l,i}>`` on the sinogram side.
    """

    __slots__ = ("max_degree", "values")

    def __init__(self, max_degree, values=None):
        n = n_coefficients(max_degree)
        if values is None:
            values = np.zeros(n)
        values = np.asarray(values, dtype=float)
        if values.shape != (n,):
            raise ValueError(f"degree {max_degree} needs {n} values, got shape {values.shape}")
        self.max_degree = int(max_degree)
        self.values = values

    @classmethod
    def unit(cls, max_degree, idx):
        c = cls(max_degree)
        c.values[idx.rank] = 1.0
        return c

    @property
    def k(self):
        return index_arrays(self.max_degree)[0]

    @property
    def l(self):
        return index_arrays(self.max_degree)[1]

    @property
    def i(self):
        return index_arrays(self.max_degree)[2]

    def __getitem__(self, idx):
        return self.values[idx.rank]

    def __len__(self):
        return len(self.values)

    def __repr__(self):
        return f"CoefficientVector(max_degree={self.max_degree}, norm={np.linalg.norm(self.values):.6g})"

    def copy(self):
        return CoefficientVector(self.max_degree, self.values.copy())

    def truncate(self, K):
        """Restrict (or zero-pad) to degree ``K``."""
        out = CoefficientVector(K)
        n = min(len(self.values), len(out.values))
        out.values[:n] = self.values[:n]
        return out

    def block(self, k):
        """View on the degree-``k`` block (``k + 1`` entries)."""
        start = k * (k + 1) // 2
        return self.values[start:start + k + 1]

    def allclose(self, other, atol=1e-12, rtol=0.0):
        return self.max_degree == other.max_degree and np.allclose(
            self.values, other.values, atol=atol, rtol=rtol)

    # -- serialization -------------------------------------------------

    def to_csv(self, path):
        k, l, i = index_arrays(self.max_degree)
        with open(path, "w") as fh:
            fh.write("k,l,i,value\n")
            for row in zip(k, l, i, self.values):
                fh.write("%d,%d,%d,%.17g\n" % row)

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        k, l, i = (data[:, c].astype(np.int64) for c in range(3))
        K = int(k.max()) if len(k) else 0
        out = cls(K)
        out.values[index_rank(k, l, i)] = data[:, 3]
        return out

    def to_binary(self, path):
        with open(path, "wb") as fh:
            fh.write(_BINARY_MAGIC)
            fh.write(struct.pack("<IIQ", _BINARY_VERSION, self.max_degree, len(self.values)))
            fh.write(self.values.astype("<f8").tobytes())

    @classmethod
    def from_binary(cls, path):
        with open(path, "rb") as fh:
            if fh.read(4) != _BINARY_MAGIC:
                raise ValueError(f"{path}: not a coefficient file")
            version, K, n = struct.unpack("<IIQ", fh.read(16))
            if version != _BINARY_VERSION:
                raise ValueError(f"{path}: unsupported version {version}")
            values = np.frombuffer(fh.read(8 * n), dtype="<f8").astype(float)
        return cls(K, values)


# -- basis evaluation ---------------------------------------------------


def radial_block(l, jmax, r):
    """Radial factors ``sqrt(2k+2) P_j^{(0,l)}(2r^2-1) r^l`` for ``j = 0..jmax``.

    Returns an array of shape ``(jmax + 1, len(r))``.
    """
    r = np.asarray(r, dtype=float)
    tab = jacobi_table(jmax, 0.0, float(l), 2 * r * r - 1, scale=r**l)
    kk = l + 2 * np.arange(jmax + 1)
    return np.sqrt(2.0 * kk + 2)[:, None] * tab


def _harmonic(l, i, theta):
    trig = np.cos if i == 1 else np.sin
    return harmonic_constant(l) * trig(l * np.asarray(theta, dtype=float))


def eval_f(idx, r, theta):
    """Image-side basis function ``f_{k,l,i}`` at polar points ``(r, theta)``."""
    r = np.asarray(r, dtype=float)
    rad = radial_block(idx.l, idx.j, np.atleast_1d(r))[idx.j].reshape(r.shape)
    out = rad * _harmonic(idx.l, idx.i, theta)
    return float(out) if np.ndim(out) == 0 else out


def eval_g(idx, theta, s):
    """Sinogram-side basis function ``g_{k,l,i}(theta, s)``, for ``|s| < 1``."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) >= 1):
        raise ValueError("g is only evaluated for |s| < 1")
    out = _g_values(idx, theta, s)
    return float(out) if np.ndim(out) == 0 else out


def _g_values(idx, theta, s):
    # closed interval; the weight factor makes g vanish at |s| = 1
    s = np.asarray(s, dtype=float)
    ck = gegenbauer_table(idx.k, 1.0, np.atleast_1d(s))[idx.k].reshape(s.shape)
    w = np.sqrt(np.clip(1 - s * s, 0.0, None))
    return w * ck * _harmonic(idx.l, idx.i, theta) / np.sqrt(gegenbauer_norm(idx.k, 1.0))


def basis_matrix(K, r, theta):
    """Matrix ``F[p, n] = f_n(r_p, theta_p)`` over all indices of degree <= K."""
    r = np.ravel(np.asarray(r, dtype=float))
    theta = np.ravel(np.asarray(theta, dtype=float))
    out = np.empty((len(r), n_coefficients(K)))
    for l in range(K + 1):
        jmax = (K - l) // 2
        rad = radial_block(l, jmax, r)
        ks = l + 2 * np.arange(jmax + 1)
        for i in (1, 2) if l else (1,):
            out[:, index_rank(ks, l, i)] = (rad * _harmonic(l, i, theta)).T
    return out


def synthesize(c, r, theta):
    """Evaluate ``sum c_{k,l,i} f_{k,l,i}`` at arbitrary polar points."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    shape = np.broadcast(r, theta).shape
    r = np.broadcast_to(r, shape).ravel()
    theta = np.broadcast_to(theta, shape).ravel()
    K = c.max_degree
    # raster grids repeat radii many times; radial work is done once per radius
    radii, where = np.unique(r, return_inverse=True)
    out = np.zeros(len(r))
    for l in range(K + 1):
        jmax = (K - l) // 2
        ks = l + 2 * np.arange(jmax + 1)
        rad = radial_block(l, jmax, radii)
        cl = harmonic_constant(l)
        out += cl * np.cos(l * theta) * (c.values[index_rank(ks, l, 1)] @ rad)[where]
        if l:
            out += cl * np.sin(l * theta) * (c.values[index_rank(ks, l, 2)] @ rad)[where]
    return out.reshape(shape)


def synthesize_xy(c, x, y):
    """Like :func:`synthesize`, at Cartesian points."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return synthesize(c, np.hypot(x, y), np.arctan2(y, x))


class PolarPlan:
    """Reusable synthesis onto a fixed polar product grid.

    The radial factors of every ``f_{k,l,i}`` are evaluated once, so repeated
    synthesis of many expansions of degree ``K`` (Monte-Carlo sweeps) costs
    one matrix product per harmonic plus an FFT over the angle.
    """

    def __init__(self, K, radii, n_theta):
        self.K = int(K)
        self.radii = np.asarray(radii, dtype=float)
        self.n_theta = int(n_theta)
        self._blocks = []
        for l in range(self.K + 1):
            ks = l + 2 * np.arange((self.K - l) // 2 + 1)
            r1 = index_rank(ks, l, 1)
            r2 = index_rank(ks, l, 2) if l else None
            self._blocks.append((l, r1, r2, radial_block(l, len(ks) - 1, self.radii)))

    @property
    def shape(self):
        return (len(self.radii), self.n_theta)

    def __call__(self, vals):
        """Synthesize a ``(batch, n_coefficients(K))`` array; returns ``(batch,) + shape``."""
        vals = np.atleast_2d(np.asarray(vals, dtype=float))
        if vals.shape[1] != n_coefficients(self.K):
            raise ValueError(f"expected {n_coefficients(self.K)} coefficients per row")
        N = self.n_theta
        batch, nr = vals.shape[0], len(self.radii)
        # all harmonics below the Nyquist index: a real inverse FFT suffices
        half = 2 * self.K < N
        spec = np.zeros((batch, nr, N // 2 + 1 if half else N), dtype=complex)
        for l, r1, r2, rad in self._blocks:
            a = vals[:, r1] @ rad
            if l == 0:
                spec[:, :, 0] += (N if half else 1) * harmonic_constant(0) * a
                continue
            b = vals[:, r2] @ rad
            # a cos + b sin = Re((a - ib) e^{il theta})
            z = 0.5 * harmonic_constant(l) * (a - 1j * b)
            if half:
                spec[:, :, l] += N * z
            else:
                spec[:, :, l % N] += z
                spec[:, :, (-l) % N] += np.conj(z)
        if half:
            return np.fft.irfft(spec, n=N, axis=-1)
        return (N * np.fft.ifft(spec, axis=-1)).real


def synthesize_polar(coeffs, radii, n_theta):
    """Evaluate expansions on the product grid ``radii x {2 pi m / n_theta}``.

    ``coeffs`` is a CoefficientVector or a ``(batch, n_coefficients(K))``
    array together with ``K`` as ``(K, array)``.  Returns shape
    ``(len(radii), n_theta)`` for a single vector, else
    ``(batch, len(radii), n_theta)``.
    """
    K, vals, single = _unpack(coeffs)
    out = PolarPlan(K, radii, n_theta)(vals)
    return out[0] if single else out


def analyze_polar(values, radii, radial_weights, n_theta, K):
    """Inner products with ``f_{k,l,i}`` from samples on a polar product grid.

    Computes ``sum_{rho, m} w_rho (2 pi / n_theta) F(rho, theta_m) f_{k,l,i}(rho, theta_m)``
    for ``F`` given as ``values`` of shape ``(len(radii), n_theta)``.
    """
    values = np.asarray(values, dtype=float)
    radii = np.asarray(radii, dtype=float)
    w = np.asarray(radial_weights, dtype=float) * (2 * np.pi / n_theta)
    spec = np.fft.fft(values, axis=-1)
    out = CoefficientVector(K)
    for l in range(K + 1):
        jmax = (K - l) // 2
        ks = l + 2 * np.arange(jmax + 1)
        rad = radial_block(l, jmax, radii) * w
        F = spec[:, l % n_theta]
        cl = harmonic_constant(l)
        out.values[index_rank(ks, l, 1)] = cl * (rad @ F.real)
        if l:
            out.values[index_rank(ks, l, 2)] = -cl * (rad @ F.imag)
    return out


def _unpack(coeffs):
    if isinstance(coeffs, CoefficientVector):
        return coeffs.max_degree, coeffs.values[None, :], True
    K, vals = coeffs
    vals = np.atleast_2d(np.asarray(vals, dtype=float))
    return int(K), vals, False


# -- Radon transform in coefficient space -------------------------------


def radon_forward_svd(c):
    """Image coefficients -> sinogram coefficients (multiply by ``lambda_k``)."""
    return CoefficientVector(c.max_degree, c.values * singular_value(c.k))


def radon_inverse_svd(y):
    """Sinogram coefficients -> image coefficients (divide by ``lambda_k``)."""
    return CoefficientVector(y.max_degree, y.values / singular_value(y.k))


def radon_synthesize(y, theta, s):
    """Evaluate ``sum y_{k,l,i} g_{k,l,i}(theta, s)`` for |s| <= 1.

    With ``y = radon_forward_svd(c)`` this is the Radon transform of the
    image expansion with coefficients ``c``.
    """
    theta, s = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(s, dtype=float))
    shape = theta.shape
    theta, s = theta.ravel(), s.ravel()
    K = y.max_degree
    s_u, inv = np.unique(s, return_inverse=True)
    ctab = gegenbauer_table(K, 1.0, s_u)
    hk = np.array([gegenbauer_norm(k, 1.0) for k in range(K + 1)])
    ctab *= (np.sqrt(np.clip(1 - s_u * s_u, 0.0, None)) / np.sqrt(hk)[:, None])
    out = np.zeros(len(theta))
    for l in range(K + 1):
        ks = np.arange(l, K + 1, 2)
        cl = harmonic_constant(l)
        prof = y.values[index_rank(ks, l, 1)] @ ctab[ks]
        out += cl * np.cos(l * theta) * prof[inv]
        if l:
            prof = y.values[index_rank(ks, l, 2)] @ ctab[ks]
            out += cl * np.sin(l * theta) * prof[inv]
    return out.reshape(shape)


def radon_line_integral(f, theta, s, n_quad=64, breakpoints=None):
    """Numerical Radon transform: ``int f(s e_theta + t e_theta^perp) dt`` over the chord.

    Parameters
    ----------
    f : callable
        ``f(x, y)`` evaluated on arrays of Cartesian coordinates.
    theta, s : float
        Line direction and signed distance from the origin, ``|s| <= 1``.
    n_quad : int
        Gauss-Legendre points per panel.
    breakpoints : sequence of float, optional
        Chord parameters ``t`` where ``f`` is discontinuous; each resulting
        panel gets its own rule, so piecewise-polynomial integrands are
        integrated exactly.
    """
    if abs(s) > 1:
        raise ValueError("|s| must be <= 1")
    if n_quad < 2:
        raise ValueError("n_quad must be >= 2")
    half = np.sqrt(max(1.0 - s * s, 0.0))
    if half == 0.0:
        return 0.0
    cuts = [-half]
    if breakpoints is not None:
        cuts += sorted(float(b) for b in breakpoints if -half < b < half)
    cuts.append(half)
    x0, w0 = roots_legendre(n_quad)
    e = np.array([np.cos(theta), np.sin(theta)])
    e_perp = np.array([-np.sin(theta), np.cos(theta)])
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        t = 0.5 * (b - a) * x0 + 0.5 * (a + b)
        pts = s * e[:, None] + t[None, :] * e_perp[:, None]
        total += 0.5 * (b - a) * np.dot(w0, f(pts[0], pts[1]))
    return float(total)


def fanbeam_to_parallel(theta1, theta2):
    """Fan-beam angles (source, ray offset) -> parallel-beam ``(theta, s)``."""
    theta = np.mod(np.asarray(theta1, dtype=float) - theta2, 2 * np.pi)
    s = np.sin(np.asarray(theta2, dtype=float))
    if theta.ndim == 0:
        return float(theta), float(s)
    return theta, s
