import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from corrnoise.analysis import ProblemParams
from corrnoise.coeffs import make_coeffs
from corrnoise.engine import DivergenceError, LinearRegression, RunConfig, run
from corrnoise.simlab import (LinRegProblem, SweepConfig, bootstrap_stderr, correlated_noise, default_horizon,
                              fit_loglog, lti_variance_check, simulate_stationary, simulate_trace, sweep)
from corrnoise.spectral import Spectrum


def ar1_variance_quad(a, sigma):
    # (1/2pi) int |a sigma / (1 - (1-a) e^{iw})|^2 dw, independent of the AR recursion
    f = lambda w: (a * sigma) ** 2 / (1 - 2 * (1 - a) * math.cos(w) + (1 - a) ** 2)
    return quad(f, -math.pi, math.pi, epsabs=1e-13, epsrel=1e-13)[0] / (2 * math.pi)


# -- helpers -------------------------------------------------------------------

def test_fit_loglog_exact_power_law():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    f = fit_loglog(x, 3.0 * x ** 1.5)
    assert f.slope == pytest.approx(1.5, abs=1e-12)
    assert math.exp(f.intercept) == pytest.approx(3.0, rel=1e-12)
    assert f.r_squared == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_loglog([1.0], [2.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.1, 100.0), min_size=3, max_size=12), st.integers(0, 10 ** 6))
def test_fit_loglog_r_squared_in_unit_interval(xs, seed):
    y = np.random.default_rng(seed).uniform(0.1, 10.0, len(xs))
    assert 0.0 <= fit_loglog(xs, y).r_squared <= 1.0


def test_bootstrap_stderr_close_to_analytic():
    s = np.random.default_rng(1).standard_normal(400)
    assert bootstrap_stderr(s) == pytest.approx(s.std(ddof=1) / 20, rel=0.1)
    assert math.isnan(bootstrap_stderr(np.array([1.0])))


def test_default_horizon():
    assert default_horizon(0.1, 0.5) == 400
    assert default_horizon(1e-6, 1e-6) == 200_000


def test_correlated_noise_matches_direct_sum():
    rng = np.random.default_rng(2)
    raw = rng.standard_normal((50, 3))
    b = make_coeffs("nu", 0.2, 50).values
    direct = np.array([[sum(b[s] * raw[t - s, j] for s in range(t + 1)) for j in range(3)] for t in range(50)])
    np.testing.assert_allclose(correlated_noise(b, raw), direct, rtol=1e-10, atol=1e-12)
    np.testing.assert_array_equal(correlated_noise(np.r_[2.0, np.zeros(49)], raw), 2.0 * raw)


# -- LTI oracle ------------------------------------------------------------------

@pytest.mark.parametrize("a", [0.1, 0.5, 0.9, 1.0])
def test_lti_analytic_matches_quadrature(a):
    chk = lti_variance_check(a, sigma=1.7, T=2000, trials=8)
    assert chk.analytic == pytest.approx(ar1_variance_quad(a, 1.7), rel=1e-10)


def test_lti_examples():
    assert lti_variance_check(1.0, T=2000, trials=8).analytic == 1.0
    assert lti_variance_check(0.5, T=2000, trials=8).analytic == pytest.approx(1 / 3, rel=1e-15)
    with pytest.raises(ValueError):
        lti_variance_check(0.0)


@pytest.mark.parametrize("a", [0.1, 0.5, 0.9])
def test_lti_simulation_within_three_stderr(a):
    chk = lti_variance_check(a)
    assert abs(chk.empirical - chk.analytic) <= 3 * chk.stderr


def test_lti_stderr_shrinks_with_trials():
    s1 = lti_variance_check(0.5, T=4000, trials=64).stderr
    s4 = lti_variance_check(0.5, T=4000, trials=256).stderr
    assert s4 / s1 == pytest.approx(0.5, rel=0.25)


# -- linear regression simulation -------------------------------------------------

def test_noiseless_run_stays_at_optimum():
    prob = LinRegProblem(Spectrum.power_decay(8), theta_star=np.ones(8))
    s = simulate_trace(prob, make_coeffs("nu", 0.1, 500), 0.05, 0.0, 500, seed=0)
    assert s.shape == (501,)
    assert np.all(s == 0.0)


def test_scalar_dpsgd_matches_closed_form():
    # Rademacher covariates with lambda = 1 make x^2 = 1: an exact AR(1) with a = eta
    eta, rho = 0.5, 1.0
    prob = LinRegProblem(Spectrum.from_values([1.0]), covariates="rademacher")
    T = 20000
    est = simulate_stationary(prob, make_coeffs("dpsgd", None, T), ProblemParams(eta, rho, R_sq=1.0), T, trials=16)
    target = eta / (2 * rho * (2 - eta))
    assert abs(est.estimate - target) <= 3 * est.stderr


def test_tail_average_ignores_burn_in_choice():
    prob = LinRegProblem(Spectrum.from_values([1.0]), covariates="rademacher")
    beta = make_coeffs("dpsgd", None, 8000)
    p = ProblemParams(0.5, 1.0, R_sq=1.0)
    a = simulate_stationary(prob, beta, p, 8000, trials=16, tail_frac=0.25)
    b = simulate_stationary(prob, beta, p, 8000, trials=16, tail_frac=0.5)
    assert abs(a.estimate - b.estimate) <= 3 * math.hypot(a.stderr, b.stderr)


def test_correlated_noise_beats_dpsgd_on_ill_conditioned_problem():
    sp = Spectrum.power_decay(64)
    eta = 0.02
    T = default_horizon(eta, sp.mu)
    p = ProblemParams(eta, 1.0)
    prob = LinRegProblem(sp)
    sgd = simulate_stationary(prob, make_coeffs("dpsgd", None, T), p, T, trials=4)
    ftrl = simulate_stationary(prob, make_coeffs("nu", eta * sp.mu, T), p, T, trials=4)
    assert ftrl.estimate + 3 * ftrl.stderr < sgd.estimate - 3 * sgd.stderr


def test_rotation_preserves_statistics():
    # H = Q diag(lam) Q^T gives the same error law as the diagonal problem
    d = 4
    sp = Spectrum.from_values([1.0, 0.5, 0.25, 0.125])
    Q, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((d, d)))
    beta = make_coeffs("nu", 0.05, 4000)
    p = ProblemParams(0.1, 1.0)
    a = simulate_stationary(LinRegProblem(sp), beta, p, 4000, trials=16)
    b = simulate_stationary(LinRegProblem(sp, rotation=Q), beta, p, 4000, trials=16)
    assert abs(a.estimate - b.estimate) <= 3 * math.hypot(a.stderr, b.stderr)


def test_fast_path_matches_engine():
    d, T, eta, std = 3, 300, 0.1, 0.7
    lam = np.array([1.0, 0.5, 0.2])
    beta = make_coeffs("nu", 0.1, T)
    prob = LinRegProblem(Spectrum(lam), sigma_sgd=0.3)
    _, thetas = simulate_trace(prob, beta, eta, std, T, seed=9, return_thetas=True)
    oracle = LinearRegression(lam, sigma_sgd=0.3)
    cfg = RunConfig(T=T, eta=eta, clip_G=1.0, rho=1.0, beta=beta, d=d, seed=9, clip_enabled=False,
                    noise_multiplier=std, log_stride=1)
    log = run(oracle, cfg)
    np.testing.assert_allclose(thetas[log.steps], log.thetas, rtol=1e-9, atol=1e-12)


def test_simulation_divergence_raises():
    prob = LinRegProblem(Spectrum.from_values([1.0]))
    with pytest.raises(DivergenceError):
        simulate_trace(prob, make_coeffs("dpsgd", None, 3000), 5.0, 1.0, 3000, seed=0)


def test_simulate_stationary_warns_outside_regime():
    prob = LinRegProblem(Spectrum.from_values([1.0]), covariates="rademacher")
    with pytest.warns(RuntimeWarning):
        simulate_stationary(prob, make_coeffs("dpsgd", None, 200), ProblemParams(0.5, 1.0), 200, trials=2)


def test_simulate_stationary_deterministic():
    prob = LinRegProblem(Spectrum.power_decay(4), seed=5)
    beta = make_coeffs("nu", 0.1, 1000)
    a = simulate_stationary(prob, beta, ProblemParams(0.05, 1.0), 1000, trials=3)
    b = simulate_stationary(prob, beta, ProblemParams(0.05, 1.0), 1000, trials=3)
    np.testing.assert_array_equal(a.per_trial, b.per_trial)


# -- sweeps --------------------------------------------------------------------

def test_sweep_needs_four_points():
    with pytest.raises(ValueError):
        sweep("dimension", [4, 8, 16])
    with pytest.raises(ValueError):
        sweep("temperature", [1, 2, 3, 4])


def test_small_dimension_sweep():
    base = SweepConfig(eta=0.05, trials=2, T=2000, workers=1)
    res = sweep("dimension", [2, 4, 8, 16], base)
    assert len(res.rows) == 8 and not res.excluded
    assert set(res.fits) == {"noisy_sgd", "noisy_ftrl"}
    # error grows with dimension for both
    assert res.fits["noisy_sgd"].slope > 0.5 and res.fits["noisy_ftrl"].slope > 0
    for r in res.rows:
        assert r["estimate"] > 0 and r["theory_lower"] > 0


def test_sweep_reports_divergent_points():
    base = SweepConfig(d=4, trials=1, T=3000, workers=1, algorithms=("noisy_sgd",))
    res = sweep("learning_rate", [0.01, 0.02, 0.04, 5.0], base)
    assert [e["axis_value"] for e in res.excluded] == [5.0]
    assert len(res.rows) == 3
