import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from corrnoise.coeffs import make_coeffs
from corrnoise.engine import (DivergenceError, LinearRegression, MeanEstimation, RunConfig, clip, logged_steps,
                              noise_multiplier, run, streams, zcdp_to_eps)
from corrnoise.toeplitz import sensitivity_T


class ZeroOracle:
    def __init__(self, d):
        self.d = d

    def reset(self, rng):
        pass

    def grad(self, theta, t):
        return np.zeros(self.d)


def cfg(T=64, d=3, family="nu", param=0.1, **kw):
    kw.setdefault("eta", 0.1)
    kw.setdefault("clip_G", 1.0)
    kw.setdefault("rho", 0.5)
    return RunConfig(T=T, d=d, beta=make_coeffs(family, param, T), **kw)


def eps_grid_oracle(rho, delta, n=10 ** 6):
    a = 1.0 + np.geomspace(1e-6, 1e6, n)
    f = rho * a + np.log(1 / (a * delta)) / (a - 1) + np.log1p(-1 / a)
    return max(0.0, float(f.min()))


# -- clip ----------------------------------------------------------------------

def test_clip_examples():
    g = np.array([0.3, 0.4])
    np.testing.assert_array_equal(clip(g, 1.0), g)
    np.testing.assert_allclose(clip(np.array([3.0, 4.0]), 1.0), [0.6, 0.8], rtol=1e-15)
    with pytest.raises(ValueError):
        clip(g, 0.0)


@settings(max_examples=200, deadline=None)
@given(g=arrays(np.float64, st.integers(1, 20), elements=st.floats(-1e6, 1e6)), G=st.floats(1e-3, 1e3))
def test_clip_output_norm_and_direction(g, G):
    out = clip(g, G)
    n = np.linalg.norm(g)
    assert np.linalg.norm(out) <= G * (1 + 1e-12)
    if n > G:
        np.testing.assert_allclose(out * n / G, g, rtol=1e-9, atol=1e-9 * n)


# -- accountant ----------------------------------------------------------------

def test_noise_multiplier_examples():
    assert noise_multiplier(make_coeffs("dpsgd", None, 10), 0.5) == pytest.approx(1.0, rel=1e-15)
    assert noise_multiplier(make_coeffs("anti_pgd", None, 4), 0.5) == pytest.approx(2.0, rel=1e-15)
    b = make_coeffs("nu", 0.05, 200)
    assert noise_multiplier(b, 2.0) == pytest.approx(noise_multiplier(b, 1.0) / math.sqrt(2), rel=1e-14)
    with pytest.raises(ValueError):
        noise_multiplier(b, 0.0)


@pytest.mark.parametrize("family,param,T,rho", [("nu", 0.05, 300, 0.3), ("anti_pgd", None, 50, 2.0),
                                               ("dpsgd", None, 10, 8.0)])
def test_noise_multiplier_round_trip(family, param, T, rho):
    b = make_coeffs(family, param, T)
    s = noise_multiplier(b, rho)
    assert s * s == pytest.approx(sensitivity_T(b) ** 2 / (2 * rho), rel=1e-14)
    assert sensitivity_T(b) ** 2 / (2 * s * s) == pytest.approx(rho, rel=1e-14)


def test_zcdp_zero_budget():
    assert zcdp_to_eps(0.0, 1e-6) == 0.0


@pytest.mark.parametrize("rho", [0.1, 1.0, 8.0])
@pytest.mark.parametrize("delta", [1e-5, 1e-6])
def test_zcdp_matches_dense_grid(rho, delta):
    assert zcdp_to_eps(rho, delta) == pytest.approx(eps_grid_oracle(rho, delta), abs=1e-4)


def test_zcdp_monotone():
    rhos = [0.01, 0.1, 0.5, 1.0, 4.0, 16.0]
    for delta in (1e-3, 1e-6, 1e-9):
        e = [zcdp_to_eps(r, delta) for r in rhos]
        assert all(b >= a for a, b in zip(e, e[1:]))
    for rho in rhos:
        e = [zcdp_to_eps(rho, d) for d in (1e-9, 1e-6, 1e-3, 0.1)]
        assert all(b <= a for a, b in zip(e, e[1:]))


def test_zcdp_below_standard_conversion():
    # the optimized conversion never exceeds rho + 2 sqrt(rho log(1/delta))
    for rho in (0.1, 1.0, 8.0):
        assert zcdp_to_eps(rho, 1e-6) <= rho + 2 * math.sqrt(rho * math.log(1e6))


def test_zcdp_domain():
    with pytest.raises(ValueError):
        zcdp_to_eps(-1.0, 1e-6)
    for d in (0.0, 1.0):
        with pytest.raises(ValueError):
            zcdp_to_eps(1.0, d)


# -- run -------------------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(T=64, eta=0.1, clip_G=1, rho=1, beta=make_coeffs("dpsgd", None, 10), d=2)
    with pytest.raises(ValueError):
        cfg(eta=0.0)
    with pytest.raises(ValueError):
        cfg(log_stride=0)


def test_zero_oracle_zero_noise_keeps_theta():
    c = cfg(noise_multiplier=0.0, theta0=np.array([1.0, -2.0, 0.5]))
    log = run(ZeroOracle(3), c)
    np.testing.assert_array_equal(log.theta_final, [1.0, -2.0, 0.5])
    assert np.all(log.thetas == log.thetas[0])


def test_dpsgd_matches_independent_noise_loop():
    T, d, eta, G, rho, seed = 100, 4, 0.2, 1.5, 0.7, 11
    oracle = MeanEstimation(d, z_mean=np.arange(d, dtype=float), s=0.3)
    log = run(oracle, cfg(T=T, d=d, family="dpsgd", param=None, eta=eta, clip_G=G, rho=rho, seed=seed))
    noise_rng, data_rng = streams(seed)
    sigma = 1.0 / math.sqrt(2 * rho) * G
    theta = np.zeros(d)
    for _ in range(T):
        z = np.arange(d, dtype=float) + 0.3 * data_rng.standard_normal(d)
        g = clip(theta - z, G)
        theta = theta - eta * (g + sigma * noise_rng.standard_normal(d))
    np.testing.assert_array_equal(log.theta_final, theta)


def test_mean_estimation_contracts_at_rate_one_minus_eta():
    z = np.array([2.0, -1.0])
    c = cfg(T=30, d=2, eta=0.5, noise_multiplier=0.0, log_stride=1, clip_enabled=False)
    log = run(MeanEstimation(2, z_mean=z), c, metric=lambda th: float(np.linalg.norm(th - z)))
    m = log.metrics
    np.testing.assert_allclose(m[1:] / m[:-1], 0.5, rtol=1e-12)


def test_reproducible_and_seed_sensitive():
    oracle = LinearRegression(np.array([1.0, 0.5, 0.25]), sigma_sgd=0.5)
    a = run(oracle, cfg(seed=5), metric=oracle.suboptimality)
    b = run(oracle, cfg(seed=5), metric=oracle.suboptimality)
    c = run(oracle, cfg(seed=6), metric=oracle.suboptimality)
    np.testing.assert_array_equal(a.thetas, b.thetas)
    np.testing.assert_array_equal(a.metrics, b.metrics)
    assert not np.array_equal(a.theta_final, c.theta_final)


def test_raw_noise_variance_and_reconstruction():
    T, d, rho, G = 4000, 8, 0.5, 2.0
    c = cfg(T=T, d=d, param=0.2, rho=rho, clip_G=G)
    log = run(ZeroOracle(d), c, record_noise=True)
    target = (noise_multiplier(c.beta, rho) * G) ** 2
    v = log.raw_noise.var()
    n = log.raw_noise.size
    # sample variance of n normals has relative std sqrt(2/n)
    assert abs(v / target - 1) <= 5 * math.sqrt(2 / n)
    # the injected noise is B w: deconvolving recovers the raw draws
    from corrnoise.toeplitz import invert_first_column
    inv = invert_first_column(c.beta).values
    rec = np.array([np.convolve(inv, log.corr_noise[:, j])[:T] for j in range(d)]).T
    np.testing.assert_allclose(rec, log.raw_noise, rtol=1e-8, atol=1e-8 * math.sqrt(target))
    # and the trajectory is theta_T = -eta sum of injected noise
    np.testing.assert_allclose(log.theta_final, -c.eta * log.corr_noise.sum(0), rtol=1e-10, atol=1e-12)


def test_generous_clipping_matches_noisy_ftrl_bit_for_bit():
    oracle = LinearRegression(np.array([1.0, 0.5, 0.25, 0.125]), theta_star=np.ones(4), sigma_sgd=0.1)
    base = dict(T=500, d=4, param=0.05, eta=0.05, rho=100.0, seed=3)
    probe = run(oracle, cfg(clip_G=1.0, clip_enabled=False, **base))
    G = 10.0 * max(probe.max_grad_norm, 1.0)
    noisy = run(oracle, cfg(clip_G=G, clip_enabled=False, **base), metric=oracle.suboptimality)
    dp = run(oracle, cfg(clip_G=G, clip_enabled=True, **base), metric=oracle.suboptimality)
    assert dp.max_grad_norm < G
    np.testing.assert_array_equal(dp.thetas, noisy.thetas)
    np.testing.assert_array_equal(dp.metrics, noisy.metrics)
    assert dp.private and not noisy.private
    assert noisy.label == "Noisy-FTRL (non-private)" and dp.label == "DP-FTRL"


def test_tight_clipping_changes_trajectory():
    oracle = LinearRegression(np.array([1.0, 0.5]), theta_star=np.full(2, 5.0))
    a = run(oracle, cfg(T=100, d=2, clip_G=0.1, clip_enabled=True))
    b = run(oracle, cfg(T=100, d=2, clip_G=0.1, clip_enabled=False))
    assert not np.array_equal(a.theta_final, b.theta_final)


def test_divergence_raises_with_step():
    c = cfg(T=400, d=2, eta=50.0, clip_enabled=False, noise_multiplier=0.0)
    with pytest.raises(DivergenceError) as e:
        run(MeanEstimation(2, z_mean=np.ones(2)), c)
    assert 0 < e.value.step < 400


def test_logged_steps_cover_stride_and_tail():
    s = logged_steps(100, 16)
    assert s[0] == 0 and s[-1] == 100
    assert set(range(0, 101, 16)) <= set(s.tolist())
    assert set(range(75, 101)) <= set(s.tolist())
    log = run(ZeroOracle(1), cfg(T=100, d=1, log_stride=16))
    np.testing.assert_array_equal(log.steps, s)


def test_linear_regression_oracle_moments():
    lam = np.array([2.0, 0.5])
    o = LinearRegression(lam, covariates="gaussian")
    o.reset(np.random.default_rng(0))
    X = np.array([o.features(o._rng.standard_normal(2)) for _ in range(20000)])
    np.testing.assert_allclose(X.var(0), lam, rtol=0.05)
    r = LinearRegression(lam, covariates="rademacher")
    r.reset(np.random.default_rng(0))
    X = np.array([r.features(r._rng.standard_normal(2)) for _ in range(100)])
    np.testing.assert_allclose(X ** 2, np.broadcast_to(lam, X.shape))
    with pytest.raises(ValueError):
        LinearRegression(lam, covariates="uniform")
