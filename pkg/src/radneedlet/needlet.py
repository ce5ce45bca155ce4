"""Needlets on the disk: cut-offs, Littlewood-Paley multipliers, kernels, atoms
and the tight frame.

Every operator here is diagonal on the degree blocks of the SVD basis, so it
is implemented as a multiplier on :class:`CoefficientVector`.  Atoms are
expansions with known coefficients,

    phi_{j,xi} = sqrt(w_xi) sum_k sqrt(a(k / 2^j)) L_k(., xi)
               = sum_{k,l,i} sqrt(w_xi) sqrt(a(k / 2^j)) f_{k,l,i}(xi) f_{k,l,i},

so inner products and evaluations never need quadrature of the atom itself.
"""

from dataclasses import dataclass

import numpy as np

from .cubature import cubature_disk
from .svd_basis import (
    CoefficientVector,
    basis_matrix,
    harmonic_constant,
    index_arrays,
    radial_block,
    synthesize_polar,
    analyze_polar,
)

WINDOWS = ("a", "b", "sqrt_a", "sqrt_b")
CUTOFF_KINDS = ("smooth_exp", "cosine_taper", "hard")


# -- cut-off functions ---------------------------------------------------


def _exp_bump(u):
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


class CutoffFunction:
    """Cut-off ``a`` with ``a = 1`` on [0, 1/2] and ``a = 0`` on [1, inf).

    ``b(t) = a(t/2) - a(t)`` is supported in [1/2, 2].
    """

    def __init__(self, kind, transition, smoothness):
        self.kind = kind
        self._transition = transition
        self.smoothness = smoothness

    def __repr__(self):
        return f"CutoffFunction({self.kind!r})"

    def a(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t <= 0.5, 1.0, 0.0)
        mid = (t > 0.5) & (t <= 1.0)
        if np.any(mid):
            out[mid] = self._transition(t[mid])
        return out if out.ndim else float(out)

    def b(self, t):
        t = np.asarray(t, dtype=float)
        return self.a(t / 2) - self.a(t)

    def window(self, name, t):
        """One of the four spectral windows ``a, b, sqrt_a, sqrt_b``."""
        if name == "a":
            return self.a(t)
        if name == "b":
            return self.b(t)
        if name == "sqrt_a":
            return np.sqrt(self.a(t))
        if name == "sqrt_b":
            # clip rounding noise of a(t/2) - a(t)
            return np.sqrt(np.clip(self.b(t), 0.0, None))
        raise ValueError(f"unknown window {name!r}, expected one of {WINDOWS}")


def _smooth_exp(t):
    u = 2.0 * (1.0 - t)
    eu, ev = _exp_bump(u), _exp_bump(1.0 - u)
    return eu / (eu + ev)


def _cosine_taper(t):
    return 0.5 * (1.0 + np.cos(np.pi * (2.0 * t - 1.0)))


def _hard(t):
    return np.ones_like(t)


def build_cutoff(kind="smooth_exp"):
    """Cut-off function of the given kind.

    ``smooth_exp`` is C-infinity, ``cosine_taper`` is C^1 and ``hard`` is the
    indicator of [0, 1].
    """
    if kind == "smooth_exp":
        return CutoffFunction(kind, _smooth_exp, "C-infinity")
    if kind == "cosine_taper":
        return CutoffFunction(kind, _cosine_taper, "C1")
    if kind == "hard":
        return CutoffFunction(kind, _hard, "discontinuous")
    raise ValueError(f"unknown cut-off kind {kind!r}")


def _as_cutoff(cutoff):
    return build_cutoff(cutoff) if isinstance(cutoff, str) else cutoff


# -- geometry -----------------------------------------------------------


def metric_d(x, y):
    """Distance on the disk inherited from the upper hemisphere.

    ``x`` and ``y`` are Cartesian points with the coordinate on the last axis.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    zx = np.sqrt(np.clip(1 - np.sum(x * x, axis=-1), 0.0, None))
    zy = np.sqrt(np.clip(1 - np.sum(y * y, axis=-1), 0.0, None))
    c = np.sum(x * y, axis=-1) + zx * zy
    return np.arccos(np.clip(c, -1.0, 1.0))


def weight_W(j, x):
    """``W_j(x) = 2^-j + sqrt(1 - |x|^2)``."""
    x = np.asarray(x, dtype=float)
    return 2.0**-j + np.sqrt(np.clip(1 - np.sum(x * x, axis=-1), 0.0, None))


# -- kernels and multipliers --------------------------------------------


def _kernel(weights, rx, tx, ry, ty):
    """``sum_k weights[k] L_k(x, y)`` for paired points (broadcast)."""
    rx, tx, ry, ty = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (rx, tx, ry, ty)))
    shape = rx.shape
    rx, tx, ry, ty = (v.ravel() for v in (rx, tx, ry, ty))
    K = len(weights) - 1
    out = np.zeros(len(rx))
    for l in range(K + 1):
        jmax = (K - l) // 2
        w = np.asarray(weights[l::2], dtype=float)
        if not np.any(w):
            continue
        px = radial_block(l, jmax, rx)
        py = radial_block(l, jmax, ry)
        out += harmonic_constant(l) ** 2 * np.cos(l * (tx - ty)) * np.einsum("j,jn,jn->n", w, px, py)
    return out.reshape(shape)


def kernel_L(k, x, y):
    """Reproducing kernel ``L_k(x, y)`` of the degree-``k`` block.

    ``x`` and ``y`` are polar pairs ``(r, theta)``.
    """
    weights = np.zeros(k + 1)
    weights[k] = 1.0
    return _kernel(weights, x[0], x[1], y[0], y[1])


def multiplier(j, window, cutoff="smooth_exp", K=None):
    """Per-degree factors ``window(k / 2^j)`` for ``k = 0..K``."""
    cutoff = _as_cutoff(cutoff)
    if K is None:
        K = 2 ** (j + 1)
    return cutoff.window(window, np.arange(K + 1) / 2.0**j)


def apply_multiplier(c, j, window="a", cutoff="smooth_exp"):
    """Multiply the degree-``k`` block of ``c`` by ``window(k / 2^j)``.

    Realizes ``A_j`` (``a``), ``B_j`` (``b``), ``C_j`` (``sqrt_a``) and
    ``D_j`` (``sqrt_b``) in coefficient space.
    """
    m = multiplier(j, window, cutoff, c.max_degree)
    return CoefficientVector(c.max_degree, c.values * m[c.k])


# -- atoms ----------------------------------------------------------------


def level_rule(j):
    """Cubature rule used to discretize level ``j``, exact for degree ``2^(j+2)``."""
    return cubature_disk(2 ** (j + 2))


def atom_degree(j, kind):
    """Highest degree carried by a father (``k < 2^j``) or mother (``k < 2^(j+1)``) atom."""
    return 2**j - 1 if kind == "father" else 2 ** (j + 1) - 1


def _window_for(kind):
    if kind == "father":
        return "sqrt_a"
    if kind == "mother":
        return "sqrt_b"
    raise ValueError(f"kind must be 'father' or 'mother', got {kind!r}")


@dataclass(frozen=True)
class NeedletAtom:
    j: int
    r: float
    theta: float
    weight: float
    kind: str = "father"
    cutoff: str = "smooth_exp"

    @property
    def xy(self):
        return np.array([self.r * np.cos(self.theta), self.r * np.sin(self.theta)])

    @property
    def degree(self):
        # a hard cut-off keeps k = 2^j as well
        extra = 1 if self.cutoff == "hard" else 0
        return atom_degree(self.j, self.kind) + extra

    def coefficients(self, K=None):
        """SVD coefficients ``sqrt(w) window(k / 2^j) f_{k,l,i}(xi)``."""
        K = self.degree if K is None else K
        win = multiplier(self.j, _window_for(self.kind), self.cutoff, K)
        k = index_arrays(K)[0]
        fxi = basis_matrix(K, [self.r], [self.theta])[0]
        return CoefficientVector(K, np.sqrt(self.weight) * win[k] * fxi)


def level_atoms(j, kind="father", cutoff="smooth_exp"):
    """All atoms of level ``j``, in the (ring-major) node order of :func:`level_rule`."""
    rule = level_rule(j)
    return [NeedletAtom(j, float(r), float(t), float(w), kind,
                        cutoff if isinstance(cutoff, str) else cutoff.kind)
            for r, t, w in zip(rule.r, rule.theta, rule.weights)]


def ring_atoms(j, kind="father", cutoff="smooth_exp"):
    """One atom per ring of the level rule (at angle 0).

    The rule is invariant under rotation by ``2 pi / n_theta`` and so is
    every ``L_k``; atoms on the same ring are rotated copies with identical
    norms.
    """
    rule = level_rule(j)
    w = rule.radial_weights * (2 * np.pi / rule.n_theta)
    name = cutoff if isinstance(cutoff, str) else cutoff.kind
    return [NeedletAtom(j, float(r), 0.0, float(wi), kind, name) for r, wi in zip(rule.radii, w)]


def needlet_eval(atom, r, theta):
    """Value of an atom at polar points ``(r, theta)``."""
    win = multiplier(atom.j, _window_for(atom.kind), atom.cutoff, atom.degree)
    return np.sqrt(atom.weight) * _kernel(win, r, theta, atom.r, atom.theta)


def gamma_table(j, K, kind="father", cutoff="smooth_exp"):
    """Dense ``(atoms, indices)`` table of ``<f_{k,l,i}, atom_{j,xi}>`` up to degree ``K``."""
    rule = level_rule(j)
    win = multiplier(j, _window_for(kind), cutoff, K)
    k = index_arrays(K)[0]
    F = basis_matrix(K, rule.r, rule.theta)
    return np.sqrt(rule.weights)[:, None] * F * win[k][None, :]


# -- tight frame ----------------------------------------------------------


@dataclass
class FrameCoefficients:
    """Mother-needlet coefficients ``beta_{j,xi}`` for ``j = -1..j_max``.

    ``levels[0]`` holds the single level ``-1`` coefficient; ``levels[j + 1]``
    holds level ``j`` in the node order of :func:`level_rule`.
    """

    j_max: int
    levels: list
    max_degree: int
    cutoff: str = "smooth_exp"

    def level(self, j):
        return self.levels[j + 1]

    def energy(self):
        return float(sum(np.sum(b * b) for b in self.levels))


def _check_frame_degree(K, j_max):
    if K > 2**j_max:
        raise ValueError(
            f"degree {K} is not resolved by levels <= {j_max}; need degree <= 2^j_max = {2 ** j_max}")


def frame_analyze(c, j_max, cutoff="smooth_exp"):
    """Mother-needlet coefficients of the expansion ``c``.

    The level ``-1`` atom is the unit-norm constant ``1 / sqrt(pi)``, i.e.
    ``f_{0,0,1}``, so its coefficient is ``c_{0,0,1}``.
    """
    cutoff = _as_cutoff(cutoff)
    K = c.max_degree
    _check_frame_degree(K, j_max)
    levels = [np.array([c.values[0]])]
    for j in range(j_max + 1):
        rule = level_rule(j)
        win = multiplier(j, "sqrt_b", cutoff, K)
        if not np.any(win):
            levels.append(np.zeros(len(rule)))
            continue
        d = CoefficientVector(K, c.values * win[c.k])
        vals = synthesize_polar(d, rule.radii, rule.n_theta)
        levels.append((np.sqrt(rule.weight_grid()) * vals).ravel())
    return FrameCoefficients(j_max, levels, K, cutoff.kind)


def frame_synthesize(beta, K=None):
    """Adjoint of :func:`frame_analyze`: ``sum_{j,xi} beta_{j,xi} psi_{j,xi}`` in coefficient space."""
    cutoff = build_cutoff(beta.cutoff)
    K = beta.max_degree if K is None else K
    _check_frame_degree(K, beta.j_max)
    out = CoefficientVector(K)
    out.values[0] += beta.levels[0][0]
    for j in range(beta.j_max + 1):
        win = multiplier(j, "sqrt_b", cutoff, K)
        if not np.any(win):
            continue
        rule = level_rule(j)
        vals = beta.level(j).reshape(rule.shape) / np.sqrt(rule.weight_grid())
        part = analyze_polar(vals, rule.radii, rule.radial_weights, rule.n_theta, K)
        out.values += part.values * win[out.k]
    return out


# -- norms and stability diagnostics -------------------------------------


def _ring_coefficients(j, kind, cutoff):
    atoms = ring_atoms(j, kind, cutoff)
    K = atoms[0].degree
    return atoms, K, np.stack([a.coefficients(K).values for a in atoms])


def ring_norms(j, p, kind="father", cutoff="smooth_exp", grid=None, chunk=8):
    """``||atom||_p`` for one atom per ring of level ``j``.

    Even integer ``p`` uses an exact cubature of degree ``p * deg``; other
    ``p`` (including ``inf``) use a dense ``grid x grid`` polar sampling with
    ``grid = 2^(j+4)`` by default.
    """
    atoms, K, coef = _ring_coefficients(j, kind, _as_cutoff(cutoff))
    if np.isfinite(p) and float(p).is_integer() and p % 2 == 0:
        rule = cubature_disk(int(p) * K)
        out = []
        for s in range(0, len(atoms), chunk):
            vals = synthesize_polar((K, coef[s:s + chunk]), rule.radii, rule.n_theta)
            out.append(rule.integrate(np.abs(vals) ** p) ** (1.0 / p))
        return atoms, np.concatenate(out)
    n = 2 ** (j + 4) if grid is None else grid
    # midpoint radii; ring atoms sit at theta = 0, which is on the angular grid
    radii = (np.arange(n) + 0.5) / n
    wr = radii / n
    out = []
    for s in range(0, len(atoms), chunk):
        vals = np.abs(synthesize_polar((K, coef[s:s + chunk]), radii, n))
        if np.isinf(p):
            peak = np.array([abs(needlet_eval(a, a.r, 0.0)) for a in atoms[s:s + chunk]])
            out.append(np.maximum(vals.max(axis=(1, 2)), peak))
        else:
            out.append(np.einsum("brt,r->b", vals**p, wr * (2 * np.pi / n)) ** (1.0 / p))
    return atoms, np.concatenate(out)


def atom_l2_norms(j, kind="father", cutoff="smooth_exp"):
    """Exact ``||atom||_2`` for one atom per ring, from the coefficients."""
    _, _, coef = _ring_coefficients(j, kind, _as_cutoff(cutoff))
    return np.sqrt(np.sum(coef * coef, axis=1))


def stability_sums(j, p, kind="father", cutoff="smooth_exp"):
    """``sum_xi ||atom_{j,xi}||_p^p`` over all atoms of level ``j``."""
    rule = level_rule(j)
    _, norms = ring_norms(j, p, kind, cutoff)
    if np.isinf(p):
        raise ValueError("stability sums need finite p")
    return float(rule.n_theta * np.sum(norms**p))


def norm_scaling_ratios(j, p, kind="father", cutoff="smooth_exp"):
    """``||atom||_p / (2^(2j) / W_j(xi))^(1/2 - 1/p)`` per ring."""
    atoms, norms = ring_norms(j, p, kind, cutoff)
    W = np.array([weight_W(j, a.xy) for a in atoms])
    expo = 0.5 - (0.0 if np.isinf(p) else 1.0 / p)
    return norms / (2.0 ** (2 * j) / W) ** expo


def nearest_ring_atom(j, r, kind="father", cutoff="smooth_exp"):
    """Atom of level ``j`` on the ring closest to radius ``r``."""
    atoms = ring_atoms(j, kind, cutoff)
    return atoms[int(np.argmin([abs(a.r - r) for a in atoms]))]


def far_field_ratio(atom, distance, grid=None):
    """``max |atom(x)|`` over ``d(x, xi) >= distance``, relative to ``max |atom|``.

    Sampled on a polar grid of ``grid x grid`` points (``2^(j+5)`` by
    default) that contains the atom centre's angle.
    """
    n = 2 ** (atom.j + 5) if grid is None else grid
    radii = (np.arange(n) + 0.5) / n
    vals = np.abs(synthesize_polar(atom.coefficients(), radii, n))
    tt = 2 * np.pi * np.arange(n) / n + atom.theta
    x = np.stack(np.broadcast_arrays(radii[:, None] * np.cos(tt), radii[:, None] * np.sin(tt)),
                 axis=-1)
    far = metric_d(x, atom.xy) >= distance
    peak = max(vals.max(), abs(float(needlet_eval(atom, atom.r, atom.theta))))
    return float(vals[far].max() / peak) if far.any() else 0.0


def kernel_coefficients(j, point, window="b", cutoff="smooth_exp"):
    """Coefficients of ``x -> sum_k window(k / 2^j) L_k(x, point)``.

    ``window="a"`` gives ``A_j(., point)`` and ``"b"`` gives ``B_j(., point)``;
    ``point`` is polar ``(r, theta)``.
    """
    K = 2 ** (j + 1)
    win = multiplier(j, window, cutoff, K)
    k = index_arrays(K)[0]
    return CoefficientVector(K, win[k] * basis_matrix(K, [point[0]], [point[1]])[0])
