"""The DP-FTRL / Noisy-FTRL optimizer loop and the zCDP accountant.

Randomness: every run owns two numpy Generator streams spawned from
SeedSequence(seed), one for the privacy noise and one for the data. Draws are
consumed strictly in step order, d normals per step for the noise, so a block
draw of shape (T, d) reproduces the per-step draws exactly (the simulation
lab relies on this). Normals come from numpy's ziggurat sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np

from .coeffs import CoeffSeq
from .toeplitz import NoiseStream, sensitivity_T


class DivergenceError(ArithmeticError):
    """A non-finite iterate appeared; `step` is the offending step index."""

    def __init__(self, step: int):
        super().__init__(f"iterate became non-finite at step {step}")
        self.step = step


class GradOracle(Protocol):
    d: int

    def reset(self, rng: np.random.Generator) -> None: ...

    def grad(self, theta: np.ndarray, t: int) -> np.ndarray: ...


def streams(seed) -> tuple[np.random.Generator, np.random.Generator]:
    """(noise_rng, data_rng) for a run seed (an int or a tuple of ints)."""
    entropy = [int(s) for s in seed] if isinstance(seed, (tuple, list)) else int(seed)
    noise_ss, data_ss = np.random.SeedSequence(entropy).spawn(2)
    return np.random.default_rng(noise_ss), np.random.default_rng(data_ss)


def clip(g: np.ndarray, G: float) -> np.ndarray:
    """Project g onto the l2 ball of radius G."""
    if G <= 0:
        raise ValueError("clip norm must be positive")
    g = np.asarray(g, dtype=float)
    n = float(np.linalg.norm(g))
    if n <= G:
        return g
    return g * (G / n)


def noise_multiplier(beta: CoeffSeq, rho: float) -> float:
    """sigma_DP = gamma_T(beta) / sqrt(2 rho)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    return sensitivity_T(beta) / math.sqrt(2.0 * rho)


def _eps_objective(x, rho, delta):
    a = np.exp(x)
    return rho * a + np.log(1.0 / (a * delta)) / (a - 1.0) + np.log1p(-1.0 / a)


def zcdp_to_eps(rho: float, delta: float) -> float:
    """epsilon such that rho-zCDP implies (epsilon, delta)-DP.

    inf over alpha > 1 of rho a + log(1/(a delta))/(a-1) + log(1 - 1/a),
    minimized by golden-section search in x = log(alpha) on [1e-6, 40]
    after a coarse bracketing scan. Clamped at 0.
    """
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must lie in (0, 1)")
    lo, hi = 1e-6, 40.0
    xs = np.linspace(lo, hi, 401)
    fs = _eps_objective(xs, rho, delta)
    i = int(np.argmin(fs))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, xs.size - 1)]
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = _eps_objective(c, rho, delta), _eps_objective(d, rho, delta)
    while b - a > 1e-12 * max(1.0, abs(a)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = _eps_objective(c, rho, delta)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = _eps_objective(d, rho, delta)
    best = min(float(fs[i]), float(fc), float(fd))
    return max(0.0, best)


@dataclass
class RunConfig:
    T: int
    eta: float
    clip_G: float
    rho: float
    beta: CoeffSeq
    d: int
    seed: int = 0
    clip_enabled: bool = True
    noise_multiplier: float | None = None  # None: gamma_T / sqrt(2 rho)
    log_stride: int = 16
    theta0: np.ndarray | None = None

    def __post_init__(self):
        if self.T < 1 or self.d < 1:
            raise ValueError("T and d must be positive")
        if self.eta <= 0 or self.clip_G <= 0 or self.rho <= 0:
            raise ValueError("eta, clip_G and rho must be positive")
        if self.beta.T < self.T:
            raise ValueError(f"beta has horizon {self.beta.T} < T = {self.T}")
        if self.log_stride < 1:
            raise ValueError("log_stride must be >= 1")

    @property
    def private(self) -> bool:
        return self.clip_enabled

    def sigma_dp(self) -> float:
        if self.noise_multiplier is not None:
            return float(self.noise_multiplier)
        return noise_multiplier(self.beta, self.rho)


@dataclass
class IterateLog:
    steps: np.ndarray
    thetas: np.ndarray
    metrics: np.ndarray | None
    theta_final: np.ndarray
    private: bool
    sigma_dp: float
    max_grad_norm: float
    raw_noise: np.ndarray | None = None
    corr_noise: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        return "DP-FTRL" if self.private else "Noisy-FTRL (non-private)"


def logged_steps(T: int, stride: int) -> np.ndarray:
    """Steps 0, stride, 2 stride, ... plus every step of the final T/4, plus T."""
    tail = T - T // 4
    idx = set(range(0, T + 1, stride)) | set(range(tail, T + 1))
    return np.array(sorted(idx), dtype=np.int64)


def run(oracle: GradOracle, cfg: RunConfig, metric: Callable[[np.ndarray], float] | None = None,
        record_noise: bool = False) -> IterateLog:
    """theta_{t+1} = theta_t - eta (g_t + sum_tau beta_tau w_{t-tau}).

    g_t is clipped to norm clip_G when clipping is enabled (DP-FTRL); with
    clipping disabled the run is Noisy-FTRL and is labeled non-private. Raw
    draws are w_t ~ N(0, (sigma_DP G)^2 I).
    """
    noise_rng, data_rng = streams(cfg.seed)
    oracle.reset(data_rng)
    sigma = cfg.sigma_dp() * cfg.clip_G
    stream = NoiseStream(cfg.beta.values[:cfg.T], cfg.d)
    theta = np.zeros(cfg.d) if cfg.theta0 is None else np.array(cfg.theta0, dtype=float)
    want = logged_steps(cfg.T, cfg.log_stride)
    wanted = set(want.tolist())
    thetas, metrics, steps = [], [], []
    raws = np.zeros((cfg.T, cfg.d)) if record_noise else None
    corrs = np.zeros((cfg.T, cfg.d)) if record_noise else None
    gmax = 0.0

    def log(t):
        steps.append(t)
        thetas.append(theta.copy())
        if metric is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                metrics.append(float(metric(theta)))

    for t in range(cfg.T):
        if t in wanted:
            log(t)
        g = np.asarray(oracle.grad(theta, t), dtype=float)
        gmax = max(gmax, float(np.linalg.norm(g)))
        if cfg.clip_enabled:
            g = clip(g, cfg.clip_G)
        w = sigma * noise_rng.standard_normal(cfg.d)
        wt = stream.push(w)
        if record_noise:
            raws[t] = w
            corrs[t] = wt
        with np.errstate(over="ignore", invalid="ignore"):
            theta = theta - cfg.eta * (g + wt)
        if not np.all(np.isfinite(theta)):
            raise DivergenceError(t)
    log(cfg.T)
    return IterateLog(
        steps=np.array(steps, dtype=np.int64), thetas=np.array(thetas),
        metrics=np.array(metrics) if metric is not None else None, theta_final=theta,
        private=cfg.private, sigma_dp=cfg.sigma_dp(), max_grad_norm=gmax,
        raw_noise=raws, corr_noise=corrs,
    )


class MeanEstimation:
    """z_t = z_mean + s * N(0, I); loss (1/2)||theta - z||^2, gradient theta - z."""

    def __init__(self, d: int, z_mean=None, s: float = 0.0):
        self.d = int(d)
        self.z_mean = np.zeros(self.d) if z_mean is None else np.asarray(z_mean, dtype=float)
        self.s = float(s)
        self._rng = None

    def reset(self, rng):
        self._rng = rng

    def grad(self, theta, t):
        z = self.z_mean + self.s * self._rng.standard_normal(self.d)
        return theta - z

    def suboptimality(self, theta):
        return 0.5 * float(np.sum((theta - self.z_mean) ** 2))


class LinearRegression:
    """Diagonal-covariance linear regression oracle.

    x_j = sqrt(lambda_j) z_j with z Gaussian ("gaussian") or sign(z)
    ("rademacher"); y = <theta*, x> + sigma_sgd xi. Each step consumes d + 1
    normals from the data stream.
    """

    def __init__(self, eigenvalues, theta_star=None, sigma_sgd: float = 0.0, covariates: str = "gaussian"):
        self.lam = np.asarray(eigenvalues, dtype=float)
        self.d = self.lam.size
        self.sqrt_lam = np.sqrt(self.lam)
        self.theta_star = np.zeros(self.d) if theta_star is None else np.asarray(theta_star, dtype=float)
        self.sigma_sgd = float(sigma_sgd)
        if covariates not in ("gaussian", "rademacher"):
            raise ValueError("covariates must be 'gaussian' or 'rademacher'")
        self.covariates = covariates
        self._rng = None

    def reset(self, rng):
        self._rng = rng

    def features(self, z):
        if self.covariates == "rademacher":
            z = np.where(z >= 0, 1.0, -1.0)
        return self.sqrt_lam * z

    def grad(self, theta, t):
        u = self._rng.standard_normal(self.d + 1)
        x = self.features(u[:self.d])
        resid = float(np.dot(theta - self.theta_star, x)) - self.sigma_sgd * u[self.d]
        return x * resid

    def suboptimality(self, theta):
        return 0.5 * float(np.sum(self.lam * (theta - self.theta_star) ** 2))
