"""Asymptotic suboptimality F_inf for mean estimation and linear regression.

All F_inf values here are on the scale E||theta - theta*||_H^2 (the scale on
which the mean-estimation closed form eta / (2 rho (2 - eta)) holds); the
simulation lab reports on the same scale.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.signal import lfilter

from .coeffs import CoeffSeq, limiting_bmagsq
from .spectral import DEFAULT_QUAD, QuadratureSpec, Spectrum, h_omega, integrate
from .toeplitz import bmagsq_of, sensitivity_inf

INF = math.inf

__all__ = [
    "ProblemParams", "Spectrum", "mean_finf", "mean_optimal_profile", "quadform_T", "quadform_Tj",
    "freq_form_j", "linreg_finf_upper", "linreg_finf_lower", "universal_floor",
    "linreg_optimal_profile", "antipgd_finf", "effective_dim", "rate_table",
]


@dataclass(frozen=True)
class ProblemParams:
    eta: float
    rho: float
    clip_G: float = 1.0
    sigma_sgd: float = 0.0
    R_sq: float | None = None  # None: 3 tr(H)
    C_kurt: float = 3.0

    def __post_init__(self):
        if not (self.eta > 0 and self.rho > 0 and self.clip_G > 0 and self.sigma_sgd >= 0):
            raise ValueError("need eta > 0, rho > 0, clip_G > 0, sigma_sgd >= 0")
        if self.R_sq is not None and self.R_sq <= 0:
            raise ValueError("R_sq must be positive")

    def r_sq(self, spectrum: Spectrum) -> float:
        return 3.0 * spectrum.trace if self.R_sq is None else float(self.R_sq)

    def dp_scale(self) -> float:
        """G^2 / (2 rho): per-unit-sensitivity DP noise variance."""
        return self.clip_G ** 2 / (2.0 * self.rho)


def _profile(b) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(b, CoeffSeq):
        return bmagsq_of(b)
    if isinstance(b, tuple) and len(b) == 2 and isinstance(b[0], str):
        return limiting_bmagsq(*b)
    if callable(b):
        return b
    raise TypeError("expected a CoeffSeq, a (family, param) pair or a callable |B(w)|^2")


def _gamma_sq(bm, quad, gamma_sq=None) -> float:
    if gamma_sq is not None:
        return float(gamma_sq)
    g = sensitivity_inf(bm, quad)
    return INF if math.isinf(g) else g * g


def _ar_den(r, w):
    """|1 - a - e^{iw}|^2 with r = 1 - a."""
    return 1.0 + r * r - 2.0 * r * np.cos(w)


# -- mean estimation --------------------------------------------------------

def mean_finf(bmagsq, params: ProblemParams, quad: QuadratureSpec = DEFAULT_QUAD,
              gamma_sq: float | None = None) -> float:
    """(eta^2/2pi) int (|B|^2 (G^2/2rho) gamma_inf^2 + sigma^2) / |1-eta-e^{iw}|^2 dw."""
    eta = params.eta
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"mean_finf requires 0 < eta <= 1, got {eta}")
    bm = _profile(bmagsq)
    g2 = _gamma_sq(bm, quad, gamma_sq)
    if math.isinf(g2):
        return INF
    r = 1.0 - eta
    dp = params.dp_scale() * g2
    s2 = params.sigma_sgd ** 2
    val = integrate(lambda w: (bm(w) * dp + s2) / _ar_den(r, w), quad)
    return eta * eta * val / (2.0 * math.pi)


def mean_optimal_profile(eta: float, omega):
    """|B*(w)|^2 = |1 - eta - e^{iw}|."""
    if not (0.0 <= eta <= 1.0):
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    r = 1.0 - eta
    out = np.sqrt(np.maximum(_ar_den(r, np.asarray(omega, dtype=float)), 0.0))
    return float(out) if np.ndim(out) == 0 else out


# -- the operator T ----------------------------------------------------------

def _check_eta_spectrum(eta, spectrum):
    if eta <= 0 or eta * spectrum.L >= 1.0:
        raise ValueError(f"need 0 < eta*lambda_1 < 1, got {eta * spectrum.L}")


def _quad_r(beta: np.ndarray, r: float) -> float:
    # P_t = r (P_{t-1} + beta_{t-1}), P_0 = 0
    p = lfilter([0.0, r], [1.0, -r], beta)
    return float(np.dot(beta, beta) + 2.0 * np.dot(beta, p))


def quadform_Tj(beta, spectrum: Spectrum, eta: float) -> np.ndarray:
    """<beta, T_j beta> for every eigenvalue lambda_j, in spectrum order."""
    _check_eta_spectrum(eta, spectrum)
    b = beta.values if isinstance(beta, CoeffSeq) else np.asarray(beta, dtype=float)
    lam, _ = spectrum.unique()
    per = {float(l): _quad_r(b, 1.0 - eta * l) for l in lam}
    return np.array([per[float(l)] for l in spectrum.eigenvalues])


def quadform_T(beta, spectrum: Spectrum, eta: float) -> float:
    """<beta, T beta> = sum_j sum_{t,tau} beta_t beta_tau (1 - eta l_j)^|t-tau|."""
    _check_eta_spectrum(eta, spectrum)
    b = beta.values if isinstance(beta, CoeffSeq) else np.asarray(beta, dtype=float)
    lam, cnt = spectrum.unique()
    return float(sum(c * _quad_r(b, 1.0 - eta * l) for l, c in zip(lam, cnt)))


def freq_form_j(bmagsq, lam_j: float, eta: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """(eta l_j / 2pi) int |B|^2 / |1 - eta l_j - e^{iw}|^2 dw."""
    bm = _profile(bmagsq)
    a = eta * lam_j
    return a * integrate(lambda w: bm(w) / _ar_den(1.0 - a, w), quad) / (2.0 * math.pi)


# -- linear regression -------------------------------------------------------

def _hint(bm, spectrum, eta, quad):
    """int |B|^2 h dw."""
    return integrate(lambda w: bm(w) * h_omega(spectrum, eta, w), quad)


def _upper_factors(spectrum, params):
    R2 = params.r_sq(spectrum)
    x = params.eta * R2
    if x >= 1.0:
        raise ValueError(f"linear-regression bounds require eta < 1/R^2 (eta R^2 = {x})")
    q = (1.0 - math.sqrt(x)) ** -2
    return (1.0 + q) * x * params.sigma_sgd ** 2, 1.0 + params.C_kurt * q


def linreg_finf_upper(beta_or_bmagsq, spectrum: Spectrum, params: ProblemParams, form: str = "frequency",
                      quad: QuadratureSpec = DEFAULT_QUAD, gamma_sq: float | None = None) -> float:
    """Upper bound on F_inf for Noisy-FTRL on linear regression.

    form="time" needs a finite CoeffSeq and uses <beta, T beta>; form="frequency"
    accepts any profile and uses int |B|^2 h. gamma_inf^2 defaults to the
    limiting sensitivity of the profile.
    """
    sgd_term, dp_factor = _upper_factors(spectrum, params)
    eta = params.eta
    if form == "time":
        if not isinstance(beta_or_bmagsq, CoeffSeq):
            raise TypeError("the time form needs a CoeffSeq")
        g2 = _gamma_sq(bmagsq_of(beta_or_bmagsq), quad, gamma_sq)
        if math.isinf(g2):
            return INF
        qf = quadform_T(beta_or_bmagsq, spectrum, eta)
        return sgd_term + dp_factor * eta * params.dp_scale() * g2 * qf
    if form == "frequency":
        bm = _profile(beta_or_bmagsq)
        g2 = _gamma_sq(bm, quad, gamma_sq)
        if math.isinf(g2):
            return INF
        dp = eta * eta * params.clip_G ** 2 * g2 / (2.0 * math.pi * params.rho)
        return sgd_term + dp_factor * dp * _hint(bm, spectrum, eta, quad)
    raise ValueError(f"form must be 'time' or 'frequency', got {form!r}")


def linreg_finf_lower(bmagsq, spectrum: Spectrum, params: ProblemParams,
                      quad: QuadratureSpec = DEFAULT_QUAD, gamma_sq: float | None = None) -> float:
    """(eta s^2/2) tr H + (eta^2 G^2 gamma^2 / 4 pi rho) int |B|^2 h dw."""
    _upper_factors(spectrum, params)  # same admissibility as the upper bound
    eta = params.eta
    bm = _profile(bmagsq)
    g2 = _gamma_sq(bm, quad, gamma_sq)
    if math.isinf(g2):
        return INF
    sgd = eta * params.sigma_sgd ** 2 * spectrum.trace / 2.0
    dp = eta * eta * params.clip_G ** 2 * g2 / (4.0 * math.pi * params.rho)
    return sgd + dp * _hint(bm, spectrum, eta, quad)


def universal_floor(spectrum: Spectrum, params: ProblemParams) -> float:
    """(1/4)(2 eta s^2 + eta^2 G^2 / (2 rho)) tr H: below every F_inf."""
    eta = params.eta
    return 0.25 * (2.0 * eta * params.sigma_sgd ** 2 + eta * eta * params.clip_G ** 2 / (2.0 * params.rho)) \
        * spectrum.trace


def linreg_optimal_profile(spectrum: Spectrum, eta: float) -> Callable[[np.ndarray], np.ndarray]:
    """|B*(w)|^2 = 1 / sqrt(h(w)), the minimizer of the lower bound."""
    return lambda w: 1.0 / np.sqrt(h_omega(spectrum, eta, w))


def antipgd_finf(nu: float, spectrum: Spectrum, params: ProblemParams) -> tuple[float, float]:
    """(lower, upper) for damped anti-PGD coefficients (1, -(1-nu)).

    Both use the exact integrals gamma_inf^2 = 1/(nu(2-nu)) and
    (1/2pi) int |1-nu-e^{iw}|^2 / |1-eta l-e^{iw}|^2 = (1+(1-nu)^2 - 2(1-nu)(1-eta l)) / (eta l (2-eta l)).
    """
    if not (0.0 < nu < 1.0):
        raise ValueError(f"nu must lie in (0, 1), got {nu}")
    eta = params.eta
    _check_eta_spectrum(eta, spectrum)
    sgd_term, dp_factor = _upper_factors(spectrum, params)
    g2 = 1.0 / (nu * (2.0 - nu))
    lam = spectrum.eigenvalues
    a = eta * lam
    c = 1.0 - nu
    J = ((1.0 + c * c) - 2.0 * c * (1.0 - a)) / (a * (2.0 - a))
    hint = 2.0 * math.pi * float(np.sum(lam * J))  # int |B|^2 h
    lower = eta * params.sigma_sgd ** 2 * spectrum.trace / 2.0 \
        + eta * eta * params.clip_G ** 2 * g2 / (4.0 * math.pi * params.rho) * hint
    upper = sgd_term + dp_factor * eta * eta * params.clip_G ** 2 * g2 / (2.0 * math.pi * params.rho) * hint
    return lower, upper


def effective_dim(spectrum: Spectrum) -> float:
    """tr(H) / ||H||_2."""
    return spectrum.trace / spectrum.L


_POW = re.compile(r"^pow\(\s*([0-9.eE+-]+)\s*\)$")


def decay_spectrum(decay: str, d: int) -> Spectrum:
    """'const' -> all ones; 'pow(a)' -> lambda_k = k^-a."""
    if decay == "const":
        return Spectrum(np.ones(d))
    m = _POW.match(decay.strip())
    if not m:
        raise ValueError(f"decay must be 'const' or 'pow(a)', got {decay!r}")
    a = float(m.group(1))
    if a < 0:
        raise ValueError("decay exponent must be >= 0")
    return Spectrum.power_decay(d, a)


def rate_table(decay: str | Sequence[str], d: int, params: ProblemParams,
               quad: QuadratureSpec = DEFAULT_QUAD) -> list[dict]:
    """Noisy-SGD vs nu-Noisy-FTRL (nu = eta mu) for eigenvalue decay profiles.

    Each row holds d_eff, the upper and lower bounds for both algorithms and
    ratio = ftrl_upper / sgd_upper.
    """
    decays = [decay] if isinstance(decay, str) else list(decay)
    rows = []
    for dec in decays:
        sp = decay_spectrum(dec, d)
        nu = min(params.eta * sp.mu, 0.999)
        sgd = ("dpsgd", None)
        ftrl = ("nu", nu)
        row = {
            "decay": dec, "d": d, "d_eff": effective_dim(sp), "nu": nu,
            "noisy_sgd_bound": linreg_finf_upper(sgd, sp, params, quad=quad),
            "noisy_ftrl_bound": linreg_finf_upper(ftrl, sp, params, quad=quad),
            "noisy_sgd_lower": linreg_finf_lower(sgd, sp, params, quad=quad),
            "noisy_ftrl_lower": linreg_finf_lower(ftrl, sp, params, quad=quad),
        }
        row["ratio"] = row["noisy_ftrl_bound"] / row["noisy_sgd_bound"]
        rows.append(row)
    return rows
