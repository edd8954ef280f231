import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrnoise.coeffs import CoeffSeq, frac_binom, frac_binom_seq, limiting_bmagsq, make_coeffs


def test_frac_binom_small_cases():
    assert frac_binom(0) == 1.0
    assert frac_binom(1) == 0.5
    assert frac_binom(2) == -0.125
    assert frac_binom(3) == 0.0625


@pytest.mark.parametrize("t", [0, 1, 5, 17, 100, 171, 500, 2000])
def test_frac_binom_against_mpmath(t):
    ref = float(mpmath.binomial(mpmath.mpf(1) / 2, t))
    assert frac_binom(t) == pytest.approx(ref, rel=1e-12, abs=0.0)


def test_frac_binom_no_overflow_past_factorial_range():
    seq = frac_binom_seq(5000)
    assert np.all(np.isfinite(seq))
    assert seq[-1] != 0.0


def test_nu_zero_example():
    np.testing.assert_allclose(make_coeffs("nu", 0.0, 4).values, [1, -0.5, -0.125, -0.0625], rtol=0, atol=0)


def test_dpsgd_example():
    assert make_coeffs("dpsgd", None, 3).values.tolist() == [1.0, 0.0, 0.0]


def test_anti_pgd_damped_example():
    np.testing.assert_array_equal(make_coeffs("anti_pgd_damped", 0.25, 3).values, [1.0, -0.75, 0.0])


def test_nu_family_is_power_series_of_sqrt():
    # independent route: Taylor coefficients of sqrt(1 - (1 - nu) z)
    nu = 0.3
    ref = mpmath.taylor(lambda z: mpmath.sqrt(1 - (1 - nu) * z), 0, 30)
    np.testing.assert_allclose(make_coeffs("nu", nu, 31).values, [float(c) for c in ref], rtol=1e-13, atol=1e-300)


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(0.0, 0.999), T=st.integers(2, 400))
def test_nu_signs_and_strict_decrease(nu, T):
    # stay where (1 - nu)^t is a normal double
    T = min(T, int(600 / max(-math.log1p(-nu), 1e-300)) + 2)
    v = make_coeffs("nu", nu, T).values
    assert v[0] == 1.0
    assert np.all(v[1:] < 0)
    a = np.abs(v[1:])
    assert np.all(np.diff(a) < 0)


@pytest.mark.parametrize("nu", [0.0, 0.01, 0.1, 0.5])
def test_nu_decay_envelope(nu):
    T = 4096
    v = make_coeffs("nu", nu, T).values
    t = np.arange(1, T)
    with np.errstate(under="ignore"):
        env = t ** -1.5 * (1 - nu) ** t
    keep = env > 1e-290
    ratio = np.abs(v[1:])[keep] / env[keep]
    # the envelope constant tends to 1/(2 sqrt(pi)) from below
    c = ratio.max()
    assert c <= 0.5 + 1e-12
    assert ratio[-1] == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-3)


def test_nu_zero_partial_sums_vanish():
    for k in range(4, 13):
        T = 2 ** k
        s = make_coeffs("nu", 0.0, T).values.sum()
        assert abs(s) <= 2.0 * T ** -0.5


@settings(max_examples=40, deadline=None)
@given(eta=st.floats(1e-4, 1.0, exclude_min=False), T=st.integers(1, 300))
def test_mean_optimal_equals_nu(eta, T):
    if eta >= 1.0:
        # nu family excludes nu = 1; mean_optimal(1) is the identity
        np.testing.assert_array_equal(make_coeffs("mean_optimal", 1.0, T).values, make_coeffs("dpsgd", None, T).values)
        return
    np.testing.assert_array_equal(make_coeffs("mean_optimal", eta, T).values, make_coeffs("nu", eta, T).values)


def test_fichtenberger_is_nu_zero():
    np.testing.assert_array_equal(make_coeffs("fichtenberger", None, 64).values, make_coeffs("nu", 0.0, 64).values)


@pytest.mark.parametrize("family,param", [("nu", 1.0), ("nu", -0.1), ("nu", None), ("anti_pgd_damped", 0.0),
                                          ("anti_pgd_damped", 1.0), ("mean_optimal", 0.0), ("bogus", None)])
def test_invalid_parameters(family, param):
    with pytest.raises(ValueError):
        make_coeffs(family, param, 8)


def test_invalid_horizon():
    with pytest.raises(ValueError):
        make_coeffs("dpsgd", None, 0)


def test_coeffseq_validation():
    with pytest.raises(ValueError):
        CoeffSeq(np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        CoeffSeq(np.array([]))
    with pytest.raises(ValueError):
        CoeffSeq(np.array([1.0, np.nan]))
    c = CoeffSeq(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        c.values[0] = 5.0
    assert c == CoeffSeq(np.array([1.0, 2.0])) and hash(c) == hash(CoeffSeq(np.array([1.0, 2.0])))


@pytest.mark.parametrize("nu", [0.05, 0.3])
def test_limiting_profile_matches_long_truncation(nu):
    from corrnoise.toeplitz import dtft_magnitude_sq

    w = np.array([0.3, 1.0, 2.5, math.pi])
    trunc = dtft_magnitude_sq(make_coeffs("nu", nu, 8192), w)
    np.testing.assert_allclose(trunc, limiting_bmagsq("nu", nu)(w), rtol=1e-6)


def test_limiting_profiles_closed_forms():
    w = np.linspace(-math.pi, math.pi, 11)
    np.testing.assert_allclose(limiting_bmagsq("dpsgd")(w), 1.0)
    np.testing.assert_allclose(limiting_bmagsq("anti_pgd_damped", 0.2)(w), np.abs(0.8 - np.exp(1j * w)) ** 2)
    np.testing.assert_allclose(limiting_bmagsq("nu", 0.2)(w), np.abs(0.8 - np.exp(1j * w)), rtol=1e-14)
