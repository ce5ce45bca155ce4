import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radneedlet.svd_basis import (
    CoefficientVector,
    PolarPlan,
    SvdIndex,
    basis_matrix,
    enumerate_indices,
    eval_f,
    eval_g,
    fanbeam_to_parallel,
    index_arrays,
    index_rank,
    n_coefficients,
    radon_forward_svd,
    radon_inverse_svd,
    radon_line_integral,
    radon_synthesize,
    singular_value,
    synthesize,
    synthesize_polar,
)


def disk_grid(n_r=40, n_t=64):
    """Independent tensor rule: Gauss-Legendre in r (times r), uniform in theta."""
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = (x + 1) / 2
    wr = w / 2 * r
    t = 2 * np.pi * np.arange(n_t) / n_t
    R, T = np.meshgrid(r, t, indexing="ij")
    W = np.outer(wr, np.full(n_t, 2 * np.pi / n_t))
    return R.ravel(), T.ravel(), W.ravel()


def sino_grid(n_s=40, n_t=64):
    """Gauss-Chebyshev (second kind) in s matches dmu = ds dtheta / sqrt(1 - s^2)
    after the weight factor inside g: integrate g^2 against ds/sqrt(1-s^2)."""
    # first-kind Chebyshev nodes integrate h(s)/sqrt(1-s^2) exactly
    j = np.arange(1, n_s + 1)
    s = np.cos((2 * j - 1) * np.pi / (2 * n_s))
    ws = np.full(n_s, np.pi / n_s)
    t = 2 * np.pi * np.arange(n_t) / n_t
    S, T = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, np.full(n_t, 2 * np.pi / n_t))
    return T.ravel(), S.ravel(), W.ravel()


# -- indices ---------------------------------------------------------------


def test_enumerate_small_cases():
    assert enumerate_indices(0) == [SvdIndex(0, 0, 1)]
    block = [i for i in enumerate_indices(4) if i.k == 4]
    assert [(i.l, i.i) for i in block] == [(0, 1), (2, 1), (2, 2), (4, 1), (4, 2)]
    assert len(enumerate_indices(8)) == 45 == n_coefficients(8)


def test_rank_matches_enumeration():
    for n, idx in enumerate(enumerate_indices(12)):
        assert idx.rank == n == index_rank(idx.k, idx.l, idx.i)
    k, l, i = index_arrays(12)
    assert np.array_equal(index_rank(k, l, i), np.arange(n_coefficients(12)))


@pytest.mark.parametrize("bad", [(1, 0, 1), (2, 3, 1), (0, 0, 2), (2, 2, 3), (-2, 0, 1)])
def test_invalid_indices(bad):
    with pytest.raises(ValueError):
        SvdIndex(*bad)


def test_block_dimension_by_gram_rank():
    R, T, W = disk_grid()
    F = basis_matrix(6, R, T)
    k = index_arrays(6)[0]
    for deg in range(7):
        cols = F[:, k == deg]
        assert np.linalg.matrix_rank(cols * np.sqrt(W)[:, None]) == deg + 1


# -- basis values ------------------------------------------------------------


def test_eval_f_examples():
    assert eval_f(SvdIndex(0, 0), 0.3, 1.1) == pytest.approx(math.sqrt(2 / (2 * math.pi)))
    assert eval_f(SvdIndex(1, 1, 1), 1.0, 0.0) == pytest.approx(2 / math.sqrt(math.pi))
    for idx in enumerate_indices(6):
        if idx.i == 2:
            assert eval_f(idx, 0.7, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_eval_g_examples():
    assert eval_g(SvdIndex(0, 0), 0.4, 0.0) == pytest.approx(1 / math.pi, rel=1e-14)
    with pytest.raises(ValueError):
        eval_g(SvdIndex(0, 0), 0.0, 1.0)


def test_f_orthonormal():
    R, T, W = disk_grid()
    F = basis_matrix(8, R, T)
    gram = (F * W[:, None]).T @ F
    assert np.abs(gram - np.eye(len(gram))).max() <= 1e-9


def test_g_orthonormal_under_dmu():
    T, S, W = sino_grid()
    idx = enumerate_indices(6)
    G = np.stack([eval_g(i, T, S) for i in idx], axis=1)
    # dmu = dtheta ds / sqrt(1 - s^2): the Chebyshev weights already carry it
    gram = (G * W[:, None]).T @ G
    assert np.abs(gram - np.eye(len(idx))).max() <= 1e-9


def test_singular_values():
    assert singular_value(0) == pytest.approx(2 * math.sqrt(math.pi))
    assert singular_value(3) == pytest.approx(math.sqrt(math.pi))
    assert singular_value(0, d=3) == pytest.approx(2 * math.pi)
    lam = singular_value(np.arange(513))
    assert np.all(np.diff(lam) < 0)


# -- Radon in coefficient space ---------------------------------------------------


def test_forward_inverse_examples():
    y = radon_forward_svd(CoefficientVector.unit(5, SvdIndex(0, 0)))
    assert y.values[0] == pytest.approx(singular_value(0)) and np.all(y.values[1:] == 0)
    z = CoefficientVector(5)
    assert np.all(radon_forward_svd(z).values == 0)
    assert np.all(radon_inverse_svd(z).values == 0)


def test_round_trip_random():
    rng = np.random.default_rng(0)
    c = CoefficientVector(64, rng.standard_normal(n_coefficients(64)))
    back = radon_inverse_svd(radon_forward_svd(c))
    assert np.abs(back.values - c.values).max() <= 1e-12


def test_line_integral_examples():
    one = lambda x, y: np.ones_like(x)
    assert radon_line_integral(one, 0.7, 0.0) == pytest.approx(2.0, rel=1e-14)
    assert radon_line_integral(one, 2.0, 0.6) == pytest.approx(1.6, rel=1e-14)
    assert radon_line_integral(one, 2.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        radon_line_integral(one, 0.0, 1.2)


def test_radon_identity_k2():
    idx = SvdIndex(2, 0, 1)
    f = lambda x, y: eval_f(idx, np.hypot(x, y), np.arctan2(y, x))
    worst = 0.0
    for th in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        for s in np.linspace(-0.95, 0.95, 9):
            num = radon_line_integral(f, th, s, n_quad=512)
            ref = singular_value(2) * eval_g(idx, th, s)
            worst = max(worst, abs(num - ref) / max(abs(ref), 1e-3))
    assert worst <= 1e-6


def test_radon_synthesize_matches_line_integrals():
    rng = np.random.default_rng(3)
    c = CoefficientVector(6, rng.standard_normal(n_coefficients(6)))
    f = lambda x, y: synthesize(c, np.hypot(x, y), np.arctan2(y, x))
    th = rng.uniform(0, 2 * np.pi, 6)
    s = rng.uniform(-1, 1, 6)
    s[0] = 1.0
    got = radon_synthesize(radon_forward_svd(c), th, s)
    for n in range(6):
        assert got[n] == pytest.approx(radon_line_integral(f, th[n], s[n]), abs=1e-12)


def test_fanbeam_examples():
    assert fanbeam_to_parallel(np.pi / 2, 0.0) == pytest.approx((np.pi / 2, 0.0))
    th, s = fanbeam_to_parallel(0.0, np.pi / 6)
    assert th == pytest.approx(2 * np.pi - np.pi / 6) and s == pytest.approx(0.5)
    th, s = fanbeam_to_parallel(1.3, 1.3)
    assert th == pytest.approx(0.0) and s == pytest.approx(math.sin(1.3))


# -- synthesis ------------------------------------------------------------------


@settings(max_examples=15, deadline=None)
@given(K=st.integers(0, 20), n_theta=st.integers(1, 50), seed=st.integers(0, 2**31))
def test_polar_synthesis_matches_pointwise(K, n_theta, seed):
    rng = np.random.default_rng(seed)
    c = CoefficientVector(K, rng.standard_normal(n_coefficients(K)))
    radii = rng.uniform(0, 1, 4)
    got = synthesize_polar(c, radii, n_theta)
    t = 2 * np.pi * np.arange(n_theta) / n_theta
    R, T = np.meshgrid(radii, t, indexing="ij")
    assert np.allclose(got, synthesize(c, R, T), atol=1e-11)


def test_polar_plan_batch():
    rng = np.random.default_rng(5)
    vals = rng.standard_normal((3, n_coefficients(10)))
    plan = PolarPlan(10, [0.1, 0.5, 0.9], 32)
    out = plan(vals)
    for b in range(3):
        assert np.allclose(out[b], synthesize_polar(CoefficientVector(10, vals[b]),
                                                    [0.1, 0.5, 0.9], 32))
    with pytest.raises(ValueError):
        plan(np.zeros((1, 5)))


# -- containers and files -----------------------------------------------------------


def test_coefficient_vector_basics():
    c = CoefficientVector(4, np.arange(15.0))
    assert c[SvdIndex(3, 1, 2)] == 7.0
    assert c[SvdIndex(3, 3, 1)] == 8.0
    assert list(c.block(2)) == [3.0, 4.0, 5.0]
    assert c.truncate(2).values.tolist() == [0, 1, 2, 3, 4, 5]
    assert len(c.truncate(6)) == 28 and c.truncate(6).values[15:].sum() == 0
    with pytest.raises(ValueError):
        CoefficientVector(4, np.zeros(3))


def test_csv_and_binary_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    c = CoefficientVector(9, rng.standard_normal(n_coefficients(9)))
    c.to_csv(tmp_path / "c.csv")
    c.to_binary(tmp_path / "c.bin")
    assert CoefficientVector.from_csv(tmp_path / "c.csv").allclose(c, atol=0)
    assert CoefficientVector.from_binary(tmp_path / "c.bin").allclose(c, atol=0)
    head = (tmp_path / "c.csv").read_text().splitlines()[:3]
    assert head[0] == "k,l,i,value" and head[1].startswith("0,0,1,")
    assert head[2].startswith("1,1,1,")
    (tmp_path / "bad.bin").write_bytes(b"XXXX" + bytes(20))
    with pytest.raises(ValueError):
        CoefficientVector.from_binary(tmp_path / "bad.bin")
