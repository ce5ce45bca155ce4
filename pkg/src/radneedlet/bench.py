"""Lp risk evaluation, the Monte-Carlo benchmark and image/CSV output."""

import configparser
import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .cubature import cubature_disk
from .estimator import (
    EstimatorSpec,
    inverse_weights,
    pick_best,
    regression_grid,
    riemann_calibration,
    riemann_sums,
    standard_normals,
)
from .phantom import (
    load_phantom_csv,
    phantom_eval,
    phantom_radon_analytic,
    project_coefficients,
    shepp_logan,
)
from .svd_basis import (
    CoefficientVector,
    PolarPlan,
    analyze_polar,
    radon_forward_svd,
    radon_synthesize,
    synthesize_xy,
)

# -- Lp errors ---------------------------------------------------------------


def _parse_p(p):
    if isinstance(p, str):
        p = p.strip().lower()
        p = math.inf if p in ("inf", "infinity", "oo") else float(p)
    p = float(p)
    if not (p >= 1):
        raise ValueError(f"norm exponent must be in [1, inf], got {p}")
    return p


def _lp_from_values(diff, weights, p):
    """``(sum w |d|^p)^(1/p)`` over the trailing two axes; max for ``p = inf``."""
    a = np.abs(diff)
    if math.isinf(p):
        return a.max(axis=(-2, -1))
    if p == 1:
        return np.einsum("...rt,r->...", a, weights)
    if p == 2:
        return np.sqrt(np.einsum("...rt,...rt,r->...", a, a, weights))
    return np.einsum("...rt,r->...", a**p, weights) ** (1.0 / p)


def lp_error(c_hat, truth, p, rule):
    """``||f - f_hat||_p`` measured with the cubature ``rule``.

    ``truth`` is a Phantom or a CoefficientVector.
    """
    p = _parse_p(p)
    plan = PolarPlan(c_hat.max_degree, rule.radii, rule.n_theta)
    f = _truth_on_rule(truth, rule)
    d = f - plan(c_hat.values)[0]
    w = rule.radial_weights * (2 * np.pi / rule.n_theta)
    return float(_lp_from_values(d, w, p))


def _truth_on_rule(truth, rule):
    if isinstance(truth, CoefficientVector):
        return PolarPlan(truth.max_degree, rule.radii, rule.n_theta)(truth.values)[0]
    x, y = rule.grid()
    return phantom_eval(truth, x, y)


class ErrorEvaluator:
    """Batched Lp errors of degree-``K`` expansions against a fixed truth.

    When only ``p = 2`` is requested the error is computed in coefficient
    space: with ``c_Q`` the rule projections of the truth,
    ``Q(|f - f_hat|^2) = Q(f^2) - 2 <c_hat, c_Q> + |c_hat|^2`` holds exactly
    because the rule integrates ``f_hat^2`` exactly.
    """

    def __init__(self, truth, K, rule, norms):
        self.K = K
        self.rule = rule
        self.norms = [_parse_p(p) for p in norms]
        self.weights = rule.radial_weights * (2 * np.pi / rule.n_theta)
        self.f = _truth_on_rule(truth, rule)
        self.coefficient_only = all(p == 2 for p in self.norms) and 2 * K <= rule.exact_degree
        if self.coefficient_only:
            self.f2 = float(np.einsum("rt,r->", self.f * self.f, self.weights))
            self.cQ = _project(self.f, rule, K).values
            self.plan = None
        else:
            self.plan = PolarPlan(K, rule.radii, rule.n_theta)

    def __call__(self, coeffs, chunk=4):
        """Errors of shape ``(batch, len(norms))`` for ``(batch, ncoef)`` input."""
        coeffs = np.atleast_2d(coeffs)
        if self.coefficient_only:
            sq = self.f2 - 2 * coeffs @ self.cQ + np.einsum("bn,bn->b", coeffs, coeffs)
            return np.sqrt(np.clip(sq, 0.0, None))[:, None] * np.ones(len(self.norms))
        out = np.empty((len(coeffs), len(self.norms)))
        for s in range(0, len(coeffs), chunk):
            d = self.f[None] - self.plan(coeffs[s:s + chunk])
            for n, p in enumerate(self.norms):
                out[s:s + chunk, n] = _lp_from_values(d, self.weights, p)
        return out


def _project(values, rule, K):
    return analyze_polar(values, rule.radii, rule.radial_weights, rule.n_theta, K)


# -- configuration -----------------------------------------------------------


@dataclass
class BenchConfig:
    model: str = "white"
    noise: tuple = (0.5, 1.0, 2.0, 4.0, 8.0)
    norms: tuple = (1.0, 2.0, 4.0, 6.0, 8.0, 10.0, math.inf)
    k0: int = 256
    R: int = 50
    seed: int = 2024
    levels: tuple = (3, 4, 5, 6, 7, 8, 9)
    degrees: tuple = (8, 16, 32, 64, 128, 256)
    cutoff: str = "smooth_exp"
    variant: str = "original"
    phantom_csv: str = ""
    intensity_scale: float = 2000.0
    truth_degree: int = 512
    quadrature_degree: int = 2048
    error_degree: int = 0
    N1: int = 64
    N2: int = 64
    sampler: str = "svd"
    batch: int = 4

    def validate(self):
        problems = []
        if self.model not in ("white", "regression"):
            problems.append(f"model: expected 'white' or 'regression', got {self.model!r}")
        if not self.noise or any(e < 0 for e in self.noise):
            problems.append("noise: need a non-empty list of levels >= 0")
        if not self.norms:
            problems.append("norms: need at least one exponent")
        if self.k0 < 0:
            problems.append("k0: must be >= 0")
        if self.R < 1:
            problems.append("R: must be >= 1")
        if any(J < 0 for J in self.levels):
            problems.append("levels: J must be >= 0")
        if any(k < 0 or k > self.k0 for k in self.degrees):
            problems.append("degrees: every kS must lie in [0, k0]")
        if self.truth_degree < self.k0:
            problems.append("truth_degree: must be >= k0")
        if self.quadrature_degree < 4 * self.truth_degree:
            problems.append("quadrature_degree: must be >= 4 * truth_degree")
        if self.error_degree and self.error_degree < 2 * self.k0:
            problems.append("error_degree: must be 0 (use quadrature_degree) or >= 2 * k0")
        if self.N1 < 1 or self.N2 < 1:
            problems.append("N1/N2: must be >= 1")
        if self.sampler not in ("svd", "analytic"):
            problems.append(f"sampler: expected 'svd' or 'analytic', got {self.sampler!r}")
        if self.batch < 1:
            problems.append("batch: must be >= 1")
        if problems:
            raise ValueError("invalid benchmark config: " + "; ".join(problems))
        return self

    def candidates(self):
        return ([EstimatorSpec.needlet(J, self.cutoff) for J in self.levels]
                + [EstimatorSpec.svd(k) for k in self.degrees] + [EstimatorSpec.naive()])

    def phantom(self):
        ph = load_phantom_csv(self.phantom_csv) if self.phantom_csv else shepp_logan(self.variant)
        return ph.scaled(self.intensity_scale) if self.intensity_scale != 1 else ph


def _split(text, conv):
    return tuple(conv(t) for t in text.replace(";", ",").split(",") if t.strip())


def _int_list(text):
    out = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


_PARSERS = {
    "noise": lambda t: _split(t, float),
    "norms": lambda t: _split(t, _parse_p),
    "levels": _int_list,
    "degrees": _int_list,
}


def config_from_mapping(mapping, base=None):
    """Build a config from ``{key: text}``; unknown keys are errors."""
    cfg = base or BenchConfig()
    known = {f.name.lower(): f.name for f in fields(BenchConfig)}
    updates = {}
    for raw, text in mapping.items():
        if raw.strip().lower() not in known:
            raise ValueError(f"invalid benchmark config: unknown key {raw.strip()!r}")
        key = known[raw.strip().lower()]
        default = getattr(BenchConfig(), key)
        try:
            if key in _PARSERS:
                updates[key] = _PARSERS[key](str(text))
            elif isinstance(default, bool):
                updates[key] = str(text).lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                updates[key] = int(text)
            elif isinstance(default, float):
                updates[key] = float(text)
            else:
                updates[key] = str(text).strip()
        except ValueError as exc:
            raise ValueError(f"invalid benchmark config: {key}: {exc}") from None
    return replace(cfg, **updates).validate()


def load_config(path):
    """Read a ``key = value`` file (``#`` comments, no section header needed)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path) as fh:
        parser.read_string("[bench]\n" + fh.read())
    return config_from_mapping(dict(parser["bench"]))


# -- benchmark -----------------------------------------------------------------


@dataclass
class BenchRow:
    model: str
    estimator: str
    tuning: int
    noise: float
    p: float
    mean_error: float
    std_error: float
    R: int


@dataclass
class BenchResult:
    rows: list = field(default_factory=list)
    candidates: list = field(default_factory=list)  # every (spec, noise, p) mean

    def best(self, estimator, noise, p):
        for r in self.rows:
            if r.estimator == estimator and r.noise == noise and r.p == p:
                return r
        raise KeyError((estimator, noise, p))


CSV_COLUMNS = ("model", "estimator", "tuning", "noise", "p", "mean_error", "std_error", "R")


def _fmt(v):
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def write_csv(result, path, rows=None):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in result.rows if rows is None else rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"{path}: expected columns {','.join(CSV_COLUMNS)}")
        rows = [BenchRow(r["model"], r["estimator"], int(r["tuning"]), float(r["noise"]),
                         float(r["p"]), float(r["mean_error"]), float(r["std_error"]), int(r["R"]))
                for r in reader]
    return BenchResult(rows)


class _Context:
    """Everything a worker needs; built once per process."""

    def __init__(self, cfg):
        self.cfg = cfg
        rule = cubature_disk(cfg.quadrature_degree)
        ph = cfg.phantom()
        self.truth = project_coefficients(ph, cfg.truth_degree, rule)
        err_rule = rule if not cfg.error_degree else cubature_disk(cfg.error_degree)
        self.evaluate = ErrorEvaluator(ph, cfg.k0, err_rule, cfg.norms)
        self.specs = cfg.candidates()
        self.weights = np.stack([inverse_weights(s, cfg.k0) for s in self.specs])
        if cfg.model == "white":
            self.clean = radon_forward_svd(self.truth.truncate(cfg.k0)).values
        else:
            theta, s = regression_grid(cfg.N1, cfg.N2)
            if cfg.sampler == "svd":
                clean = radon_synthesize(radon_forward_svd(self.truth), theta, s)
            else:
                clean = phantom_radon_analytic(ph, theta, np.clip(s, -1, 1))
            self.clean = np.asarray(clean)
            self.cal = riemann_calibration(cfg.N1, cfg.N2)

    def observe(self, noise, realization):
        cfg = self.cfg
        if cfg.model == "white":
            y = self.clean.copy()
            if noise:
                y += noise * standard_normals(cfg.seed, realization, len(y))
            return y
        sigma = noise * math.sqrt(cfg.N1 * cfg.N2)
        Y = self.clean.copy()
        if sigma:
            Y = Y + sigma * standard_normals(cfg.seed, realization, cfg.N1 * cfg.N2).reshape(
                cfg.N1, cfg.N2)
        return self.cal * riemann_sums(Y, cfg.k0)

    def cell(self, noise, realization):
        y = self.observe(noise, realization)
        return self.evaluate(self.weights * y[None, :], chunk=self.cfg.batch)


_WORKER = None


def _init_worker(cfg):
    global _WORKER
    _WORKER = _Context(cfg)


def _run_cell(args):
    return _WORKER.cell(*args)


def run_benchmark(cfg, jobs=1, progress=None):
    """Oracle-tuned Monte-Carlo comparison of needlet, SVD and naive estimators.

    Realization ``r`` of every noise level uses the noise stream ``(seed, r)``
    (common random numbers across levels and candidates), so results do
    not depend on ``jobs`` or on scheduling.
    """
    cfg.validate()
    cells = [(e, r) for e in cfg.noise for r in range(cfg.R)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(cfg,)) as pool:
            errs = []
            for n, out in enumerate(pool.map(_run_cell, cells, chunksize=max(1, cfg.R // 4))):
                errs.append(out)
                if progress:
                    progress(n + 1, len(cells))
        specs = cfg.candidates()
    else:
        ctx = _Context(cfg)
        errs = []
        for n, c in enumerate(cells):
            errs.append(ctx.cell(*c))
            if progress:
                progress(n + 1, len(cells))
        specs = ctx.specs
    errs = np.asarray(errs).reshape(len(cfg.noise), cfg.R, len(specs), len(cfg.norms))
    means = errs.mean(axis=1)
    stds = errs.std(axis=1, ddof=1) if cfg.R > 1 else np.zeros_like(means)

    result = BenchResult()
    for a, eps in enumerate(cfg.noise):
        for b, p in enumerate(_parse_p(q) for q in cfg.norms):
            table = {s: means[a, n, b] for n, s in enumerate(specs)}
            for s, m in table.items():
                result.candidates.append(BenchRow(
                    cfg.model, s.kind, s.tuning if s.tuning is not None else cfg.k0,
                    float(eps), p, float(m), float(stds[a, specs.index(s), b]), cfg.R))
            for kind in ("needlet", "svd", "naive"):
                sub = {s: m for s, m in table.items() if s.kind == kind}
                best = pick_best(sub)
                n = specs.index(best)
                result.rows.append(BenchRow(
                    cfg.model, kind, best.tuning if best.tuning is not None else cfg.k0,
                    float(eps), p, float(means[a, n, b]), float(stds[a, n, b]), cfg.R))
    return result


# -- images ------------------------------------------------------------------------


@dataclass
class ImageGrid:
    """Row-major pixel values; row 0 is the top (``y = 1``).  Pixels outside
    the disk hold ``nan``."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be >= 1")
        self.values = np.asarray(self.values, dtype=float).reshape(self.height, self.width)

    @staticmethod
    def pixel_centres(width, height):
        x = -1 + (2 * np.arange(width) + 1) / width
        y = 1 - (2 * np.arange(height) + 1) / height
        return np.meshgrid(x, y)

    @property
    def inside(self):
        return np.isfinite(self.values)


def render(c, resolution, height=None):
    """Synthesize an expansion on a ``resolution x height`` pixel grid of [-1, 1]^2."""
    width = int(resolution)
    height = width if height is None else int(height)
    X, Y = ImageGrid.pixel_centres(width, height)
    inside = X * X + Y * Y <= 1
    vals = np.full(X.shape, np.nan)
    vals[inside] = synthesize_xy(c, X[inside], Y[inside])
    return ImageGrid(width, height, vals)


def render_phantom(ph, resolution):
    X, Y = ImageGrid.pixel_centres(resolution, resolution)
    vals = np.where(X * X + Y * Y <= 1, phantom_eval(ph, X, Y), np.nan)
    return ImageGrid(resolution, resolution, vals)


def write_pgm(img, path, vmin=None, vmax=None):
    """8-bit binary PGM with linear min-max scaling; outside pixels are 0.

    The scaling goes to ``path + ".scale"`` as ``key = value`` lines.
    """
    v = img.values
    finite = v[np.isfinite(v)]
    lo = float(finite.min()) if vmin is None else float(vmin)
    hi = float(finite.max()) if vmax is None else float(vmax)
    span = hi - lo if hi > lo else 1.0
    q = np.clip(np.round((np.nan_to_num(v, nan=lo) - lo) / span * 255), 0, 255).astype(np.uint8)
    q[~np.isfinite(v)] = 0
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (img.width, img.height))
        fh.write(q.tobytes())
    with open(os.fspath(path) + ".scale", "w") as fh:
        fh.write(f"min = {lo!r}\nmax = {hi!r}\noutside = 0\n")
        fh.write("# value = min + (max - min) * pixel / 255\n")
    return lo, hi


def read_pgm(path):
    """``(width, height, uint8 array)`` from a binary PGM written by :func:`write_pgm`."""
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    pix = np.frombuffer(data[len(data) - w * h:], dtype=np.uint8).reshape(h, w)
    return w, h, pix
