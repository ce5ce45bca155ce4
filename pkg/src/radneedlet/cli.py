"""Command-line interface.

Exit codes: 0 success, 1 usage or input error, 2 numerical-validation failure.
"""

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import bench, selfcheck
from .cubature import cubature_disk
from .estimator import (
    EstimatorSpec,
    RegressionObservation,
    WhiteNoiseObservation,
    analytic_sampler,
    estimate,
    regression_grid,
    simulate_regression,
    simulate_white_noise,
    svd_sampler,
)
from .needlet import (
    CUTOFF_KINDS,
    kernel_coefficients,
    nearest_ring_atom,
)
from .phantom import (
    VARIANTS,
    load_phantom_csv,
    membership_breakpoints,
    phantom_eval,
    phantom_radon_analytic,
    project_coefficients,
    save_phantom_csv,
    shepp_logan,
)
from .svd_basis import CoefficientVector, radon_forward_svd, radon_line_integral, radon_synthesize

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- shared helpers ----------------------------------------------------------


def _phantom_args(p):
    p.add_argument("--variant", choices=VARIANTS, default="original",
                   help="Shepp-Logan density table (default: original)")
    p.add_argument("--phantom", metavar="CSV", help="custom phantom (cx,cy,a,b,phi,density rows)")
    p.add_argument("--scale", type=float, default=1.0, help="multiply all densities")


def _load_phantom(args):
    ph = load_phantom_csv(args.phantom) if args.phantom else shepp_logan(args.variant)
    return ph.scaled(args.scale) if args.scale != 1.0 else ph


def _read_coefficients(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == b"RNCV":
        return CoefficientVector.from_binary(path)
    return CoefficientVector.from_csv(path)


def _write_coefficients(c, path):
    if path.endswith(".bin"):
        c.to_binary(path)
    else:
        c.to_csv(path)


def _coefficients_or_phantom(args, K):
    if getattr(args, "coeffs", None):
        return _read_coefficients(args.coeffs)
    return project_coefficients(_load_phantom(args), K, cubature_disk(4 * K))


def _parse_norm(text):
    try:
        return bench._parse_p(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _spec(args):
    if args.estimator == "needlet":
        if args.levels is None:
            raise UsageError("--levels J is required for the needlet estimator")
        return EstimatorSpec.needlet(args.levels, args.cutoff)
    if args.estimator == "svd":
        if args.degree is None:
            raise UsageError("--degree kS is required for the SVD estimator")
        return EstimatorSpec.svd(args.degree)
    return EstimatorSpec.naive()


def _say(args, msg):
    if not getattr(args, "quiet", False):
        print(msg)


# -- verbs ---------------------------------------------------------------------


def cmd_phantom(args):
    ph = _load_phantom(args)
    out = args.out
    if out.endswith(".csv"):
        save_phantom_csv(ph, out)
    else:
        if args.degree:
            c = project_coefficients(ph, args.degree, cubature_disk(4 * args.degree))
            img = bench.render(c, args.resolution)
        else:
            img = bench.render_phantom(ph, args.resolution)
        bench.write_pgm(img, out)
    _say(args, f"wrote {out}")
    return EXIT_OK


def cmd_project(args):
    ph = _load_phantom(args)
    q = args.quadrature or 4 * args.degree
    c = project_coefficients(ph, args.degree, cubature_disk(q))
    _write_coefficients(c, args.out)
    _say(args, f"wrote {len(c)} coefficients (degree {args.degree}) to {args.out}")
    return EXIT_OK


def cmd_radon(args):
    if args.coeffs and args.method != "svd":
        raise UsageError("--coeffs only applies to --method svd")
    ph = None if args.coeffs else _load_phantom(args)
    theta = 2 * np.pi * np.arange(args.n_theta) / args.n_theta
    s = -1 + (2 * np.arange(args.n_s) + 1) / args.n_s
    T, S = np.meshgrid(theta, s, indexing="ij")
    if args.method == "analytic":
        vals = phantom_radon_analytic(ph, T, S)
    elif args.method == "numeric":
        vals = np.array([[radon_line_integral(lambda x, y: phantom_eval(ph, x, y), t, si,
                                              breakpoints=membership_breakpoints(ph, t, si))
                          for si in s] for t in theta])
    else:
        c = _coefficients_or_phantom(args, args.degree)
        vals = radon_synthesize(radon_forward_svd(c), T, S)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "s", "value"])
        for t, si, v in zip(T.ravel(), S.ravel(), np.ravel(vals)):
            w.writerow([repr(float(t)), repr(float(si)), repr(float(v))])
    _say(args, f"wrote {args.n_theta} x {args.n_s} sinogram samples to {args.out}")
    return EXIT_OK


def _write_regression(obs, path):
    theta, s = regression_grid(obs.N1, obs.N2)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i1", "i2", "theta", "s", "Y"])
        for i1 in range(obs.N1):
            for i2 in range(obs.N2):
                w.writerow([i1, i2, repr(float(theta[i1, i2])), repr(float(s[i1, i2])),
                            repr(float(obs.Y[i1, i2]))])


def _read_regression(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "Y" not in rows[0]:
        raise UsageError(f"{path}: expected columns i1,i2,theta,s,Y")
    i1 = np.array([int(r["i1"]) for r in rows])
    i2 = np.array([int(r["i2"]) for r in rows])
    N1, N2 = int(i1.max()) + 1, int(i2.max()) + 1
    Y = np.zeros((N1, N2))
    Y[i1, i2] = [float(r["Y"]) for r in rows]
    return RegressionObservation(Y, float("nan"), N1, N2)


def cmd_simulate(args):
    if args.model == "white":
        c = _coefficients_or_phantom(args, args.k0)
        obs = simulate_white_noise(c.truncate(max(c.max_degree, args.k0)), args.noise,
                                   args.k0, args.seed)
        _write_coefficients(obs.y, args.out)
    else:
        if args.coeffs or args.sampler == "svd":
            sampler = svd_sampler(_coefficients_or_phantom(args, args.degree))
        else:
            sampler = analytic_sampler(_load_phantom(args))
        sigma = args.noise * math.sqrt(args.N1 * args.N2)
        obs = simulate_regression(sampler, args.N1, args.N2, sigma, args.seed)
        _write_regression(obs, args.out)
    _say(args, f"wrote {args.model} observation to {args.out}")
    return EXIT_OK


def cmd_estimate(args):
    spec = _spec(args)
    if args.model == "white":
        y = _read_coefficients(args.obs)
        obs = WhiteNoiseObservation(y, float("nan"), y.max_degree)
        c = estimate(obs, spec)
    else:
        c = estimate(_read_regression(args.obs), spec, args.k0)
    _write_coefficients(c, args.out)
    if args.render:
        bench.write_pgm(bench.render(c, args.resolution), args.render)
    _say(args, f"wrote {spec.label()} estimate to {args.out}")
    return EXIT_OK


def cmd_bench(args):
    cfg = bench.load_config(args.config) if args.config else bench.BenchConfig()
    overrides = {}
    for key in ("model", "k0", "R", "seed", "cutoff", "variant", "N1", "N2", "sampler"):
        v = getattr(args, key)
        if v is not None:
            overrides[key] = str(v)
    if args.noise:
        overrides["noise"] = ",".join(repr(e) for e in args.noise)
    if args.norm:
        overrides["norms"] = ",".join("inf" if math.isinf(p) else repr(p) for p in args.norm)
    if args.levels:
        overrides["levels"] = args.levels
    if args.degrees:
        overrides["degrees"] = args.degrees
    if args.scale is not None:
        overrides["intensity_scale"] = str(args.scale)
    cfg = bench.config_from_mapping(overrides, base=cfg)

    def progress(n, total):
        if not args.quiet and (n == total or n % max(1, total // 20) == 0):
            print(f"  {n}/{total} realizations", file=sys.stderr)

    result = bench.run_benchmark(cfg, jobs=args.jobs, progress=progress)
    bench.write_csv(result, args.out)
    if args.candidates:
        bench.write_csv(result, args.candidates, rows=result.candidates)
    if not args.quiet:
        for r in result.rows:
            p = "inf" if math.isinf(r.p) else f"{r.p:g}"
            print(f"eps={r.noise:<6g} p={p:<4} {r.estimator:<8} tuning={r.tuning:<4d} "
                  f"error={r.mean_error:.6g} (sd {r.std_error:.3g})")
    return EXIT_OK


def cmd_atoms(args):
    j = args.levels if args.levels is not None else 4
    if args.kernel:
        c = kernel_coefficients(j, (args.radius, 0.0), "b", args.cutoff)
    else:
        c = nearest_ring_atom(j, args.radius, args.kind, args.cutoff).coefficients()
    img = bench.render(c, args.resolution)
    bench.write_pgm(img, args.out)
    _say(args, f"wrote level-{j} {'kernel' if args.kernel else args.kind} image to {args.out}")
    return EXIT_OK


def cmd_selftest(args):
    failures = selfcheck.run(verbose=not args.quiet)
    if args.full:
        root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
        target = os.path.join(root, "tests", "test_acceptance.py")
        if not os.path.exists(target):
            raise UsageError("acceptance suite not found next to the package sources")
        import pytest
        if pytest.main(["-q", target]) != 0:
            failures += 1
    return EXIT_NUMERIC if failures else EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="radneedlet", description="Radon inversion with disk needlets.")
    p.add_argument("--quiet", action="store_true", help="suppress progress messages")
    sub = p.add_subparsers(dest="verb", parser_class=_Parser, required=True)

    q = sub.add_parser("phantom", help="render or export the phantom")
    _phantom_args(q)
    q.add_argument("--resolution", type=int, default=256)
    q.add_argument("--degree", type=int, default=0,
                   help="render the degree-K projection instead of the exact phantom")
    q.add_argument("--out", required=True, help=".pgm image or .csv ellipse table")
    q.set_defaults(func=cmd_phantom)

    q = sub.add_parser("project", help="SVD coefficients of the phantom")
    _phantom_args(q)
    q.add_argument("--degree", type=int, default=512)
    q.add_argument("--quadrature", type=int, default=0,
                   help="cubature exactness (default 4 x degree)")
    q.add_argument("--out", required=True, help=".csv (k,l,i,value) or .bin")
    q.set_defaults(func=cmd_project)

    q = sub.add_parser("radon", help="sample the Radon transform on a (theta, s) grid")
    _phantom_args(q)
    q.add_argument("--method", choices=("analytic", "numeric", "svd"), default="analytic")
    q.add_argument("--coeffs", help="coefficient file for --method svd")
    q.add_argument("--degree", type=int, default=128, help="projection degree for --method svd")
    q.add_argument("--n-theta", type=int, default=64)
    q.add_argument("--n-s", type=int, default=64)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_radon)

    q = sub.add_parser("simulate", help="draw a noisy observation")
    _phantom_args(q)
    q.add_argument("--model", choices=("white", "regression"), default="white")
    q.add_argument("--noise", type=float, default=1.0,
                   help="white-noise level eps; regression uses sigma = eps sqrt(N1 N2)")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--k0", type=int, default=256)
    q.add_argument("--coeffs", help="true coefficients (default: project the phantom)")
    q.add_argument("--degree", type=int, default=512, help="degree of the regression sampler")
    q.add_argument("--sampler", choices=("svd", "analytic"), default="svd")
    q.add_argument("--N1", type=int, default=64)
    q.add_argument("--N2", type=int, default=64)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("estimate", help="apply one estimator to an observation")
    q.add_argument("obs", help="observation file written by 'simulate'")
    q.add_argument("--model", choices=("white", "regression"), default="white")
    q.add_argument("--estimator", choices=("needlet", "svd", "naive"), default="needlet")
    q.add_argument("--levels", type=int, help="needlet level J")
    q.add_argument("--degree", type=int, help="SVD truncation degree kS")
    q.add_argument("--cutoff", choices=CUTOFF_KINDS, default="smooth_exp")
    q.add_argument("--k0", type=int, help="recovered degree for regression data")
    q.add_argument("--render", metavar="PGM", help="also write an image")
    q.add_argument("--resolution", type=int, default=256)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_estimate)

    q = sub.add_parser("bench", help="oracle-tuned Monte-Carlo comparison")
    q.add_argument("--config", help="key = value file")
    q.add_argument("--model", choices=("white", "regression"))
    q.add_argument("--noise", type=float, action="append", help="noise level (repeatable)")
    q.add_argument("--norm", type=_parse_norm, action="append", help="Lp exponent (repeatable)")
    q.add_argument("--k0", type=int)
    q.add_argument("--R", type=int, help="realizations per noise level")
    q.add_argument("--seed", type=int)
    q.add_argument("--levels", help="needlet levels, e.g. 3-9")
    q.add_argument("--degrees", help="SVD degrees, e.g. 8,16,32")
    q.add_argument("--cutoff", choices=CUTOFF_KINDS)
    q.add_argument("--variant", choices=VARIANTS)
    q.add_argument("--scale", type=float, help="phantom intensity scale")
    q.add_argument("--N1", type=int)
    q.add_argument("--N2", type=int)
    q.add_argument("--sampler", choices=("svd", "analytic"))
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--candidates", metavar="CSV", help="also write every candidate's mean error")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_bench)

    q = sub.add_parser("atoms", help="rasterize a needlet or a B_j kernel")
    q.add_argument("--levels", type=int, help="level j (default 4)")
    q.add_argument("--radius", type=float, default=0.5, help="radius of the centre")
    q.add_argument("--kind", choices=("father", "mother"), default="father")
    q.add_argument("--kernel", action="store_true", help="render B_j(., y0) instead of an atom")
    q.add_argument("--cutoff", choices=CUTOFF_KINDS, default="smooth_exp")
    q.add_argument("--resolution", type=int, default=256)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_atoms)

    q = sub.add_parser("selftest", help="fast numerical checks (exit 2 on failure)")
    q.add_argument("--full", action="store_true", help="also run the acceptance test module")
    q.set_defaults(func=cmd_selftest)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"radneedlet {args.verb}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
