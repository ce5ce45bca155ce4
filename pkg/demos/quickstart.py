"""Project the phantom, add white noise, and compare the three estimators.

Run after ``pip install -e .``; writes PGM images to the current directory.
"""

from radneedlet.bench import lp_error, render, write_pgm
from radneedlet.cubature import cubature_disk
from radneedlet.estimator import EstimatorSpec, estimate, simulate_white_noise
from radneedlet.phantom import project_coefficients, shepp_logan

K0 = 128
NOISE = 4.0
SCALE = 2000.0  # benchmark intensity; puts the noise levels on the signal's scale

phantom = shepp_logan(scale=SCALE)
rule = cubature_disk(4 * K0)  # the projection needs exactness 4 * K0
truth = project_coefficients(phantom, K0, rule)
obs = simulate_white_noise(truth, NOISE, K0, seed=1)

specs = {
    "needlet": EstimatorSpec.needlet(6),
    "svd": EstimatorSpec.svd(32),
    "naive": EstimatorSpec.naive(),
}
for name, spec in specs.items():
    est = estimate(obs, spec)
    err = lp_error(est, phantom, 2, rule)
    write_pgm(render(est, 128), f"{name}.pgm")
    print(f"{name:8s} L2 error {err:9.2f}  -> {name}.pgm")
