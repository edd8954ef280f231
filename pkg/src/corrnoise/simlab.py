"""Simulation lab: stationary error of Noisy-SGD / nu-Noisy-FTRL on linear
regression, scalar LTI checks, and log-log slope sweeps.

Stationary estimates are on the E||theta - theta*||_H^2 scale, i.e. twice the
average suboptimality, so they compare directly with the analysis module.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.signal import fftconvolve, lfilter

from .analysis import ProblemParams, effective_dim, linreg_finf_lower
from .coeffs import CoeffSeq, limiting_bmagsq, make_coeffs
from .engine import DivergenceError, streams
from .spectral import Spectrum
from .toeplitz import sensitivity_inf

T_CAP = 200_000
CHUNK = 2048
ALGORITHMS = ("noisy_sgd", "noisy_ftrl")


@dataclass(frozen=True)
class LinRegProblem:
    spectrum: Spectrum
    theta_star: np.ndarray | None = None
    sigma_sgd: float = 0.0
    seed: int = 0
    covariates: str = "gaussian"
    rotation: np.ndarray | None = None  # orthogonal Q: H = Q diag(lambda) Q^T

    @property
    def d(self) -> int:
        return self.spectrum.d

    def star(self) -> np.ndarray:
        return np.zeros(self.d) if self.theta_star is None else np.asarray(self.theta_star, dtype=float)


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float
    points: tuple


class Estimate(NamedTuple):
    estimate: float
    stderr: float
    per_trial: np.ndarray


class LTICheck(NamedTuple):
    empirical: float
    analytic: float
    stderr: float


def fit_loglog(x, y) -> SlopeFit:
    """Ordinary least squares of log y on log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    if lx.size < 2:
        raise ValueError("need at least two points")
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + icpt)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(icpt), min(max(r2, 0.0), 1.0), tuple(zip(lx.tolist(), ly.tolist())))


def bootstrap_stderr(samples: np.ndarray, n_boot: int = 2000, seed: int = 0) -> float:
    """Bootstrap standard error of the mean (deterministic resampling)."""
    s = np.asarray(samples, dtype=float)
    if s.size < 2:
        return float("nan")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, s.size, size=(n_boot, s.size))
    return float(np.std(s[idx].mean(axis=1), ddof=1))


def default_horizon(eta: float, mu: float) -> int:
    """20 / (eta mu), capped at 2e5."""
    return int(min(T_CAP, math.ceil(20.0 / (eta * mu))))


def correlated_noise(beta: np.ndarray, raw: np.ndarray, col_chunk: int = 16) -> np.ndarray:
    """sum_{tau<=t} beta_tau raw[t - tau] for every column, by FFT convolution."""
    T = raw.shape[0]
    b = beta[:T]
    nz = np.flatnonzero(b)
    if nz.size == 1 and nz[0] == 0:
        return b[0] * raw
    out = np.empty_like(raw)
    for j in range(0, raw.shape[1], col_chunk):
        out[:, j:j + col_chunk] = fftconvolve(raw[:, j:j + col_chunk], b[:, None], axes=0)[:T]
    return out


def simulate_trace(problem: LinRegProblem, beta: CoeffSeq, eta: float, noise_std: float, T: int,
                   seed, tail_start: int = 0, return_thetas: bool = False):
    """One Noisy-FTRL run on linear regression, started at theta*.

    Consumes the run's noise and data streams in the same order as
    engine.run with engine.LinearRegression, so both paths produce the same
    trajectory up to rounding of the noise convolution. Returns the
    suboptimality for steps tail_start..T (state after each update, plus the
    initial state when tail_start = 0).
    """
    noise_rng, data_rng = streams(seed)
    d = problem.d
    lam = problem.spectrum.eigenvalues
    sqrt_lam = np.sqrt(lam)
    Q = problem.rotation
    raw = noise_rng.standard_normal((T, d))
    raw *= noise_std
    corr = correlated_noise(beta.values, raw)
    del raw
    # work in the eigenbasis: delta = Q^T (theta - theta*)
    delta = np.zeros(d)
    sub = np.empty(T + 1 - tail_start)
    thetas = np.empty((T + 1, d)) if return_thetas else None
    if tail_start == 0:
        sub[0] = 0.0
    if return_thetas:
        thetas[0] = problem.star()
    sig = problem.sigma_sgd
    rad = problem.covariates == "rademacher"
    if Q is not None:
        corr = corr @ Q  # noise in the eigenbasis
    with np.errstate(over="ignore", invalid="ignore"):
        for c0 in range(0, T, CHUNK):
            n = min(CHUNK, T - c0)
            U = data_rng.standard_normal((n, d + 1))
            Z = np.where(U[:, :d] >= 0, 1.0, -1.0) if rad else U[:, :d]
            X = Z * sqrt_lam
            xi = sig * U[:, d]
            for i in range(n):
                x = X[i]
                r = x @ delta - xi[i]
                delta -= eta * (r * x + corr[c0 + i])
                t = c0 + i + 1
                if t >= tail_start:
                    sub[t - tail_start] = 0.5 * (lam * delta) @ delta
                if return_thetas:
                    thetas[t] = problem.star() + (delta if Q is None else Q @ delta)
            if not np.all(np.isfinite(delta)):
                bad = np.flatnonzero(~np.isfinite(sub[max(0, c0 + 1 - tail_start):]))
                raise DivergenceError(int(c0 + (bad[0] if bad.size else n)))
    return (sub, thetas) if return_thetas else sub


def _family_beta(alg: str, nu: float, T: int) -> tuple[CoeffSeq, float]:
    """Coefficients and gamma_inf for an algorithm label."""
    if alg == "noisy_sgd":
        return make_coeffs("dpsgd", None, T), 1.0
    if alg == "noisy_ftrl":
        return make_coeffs("nu", nu, T), sensitivity_inf(limiting_bmagsq("nu", nu))
    raise ValueError(f"unknown algorithm {alg!r}")


def simulate_stationary(problem: LinRegProblem, beta: CoeffSeq, params: ProblemParams, T: int,
                        trials: int = 8, gamma: float | None = None, tail_frac: float = 0.25,
                        seed=None) -> Estimate:
    """Stationary F_inf estimate (scale E||theta - theta*||_H^2) with bootstrap stderr.

    Averages twice the suboptimality over the final tail_frac of T steps and
    over trials. Noise std per coordinate is G gamma / sqrt(2 rho); gamma
    defaults to gamma_inf of the coefficients' DTFT.
    """
    eta = params.eta
    R2 = params.r_sq(problem.spectrum)
    if eta * R2 >= 1.0:
        warnings.warn(f"eta R^2 = {eta * R2:.3g} >= 1: outside the analyzed regime", RuntimeWarning, stacklevel=2)
    if gamma is None:
        from .toeplitz import bmagsq_of
        gamma = sensitivity_inf(bmagsq_of(beta))
    noise_std = params.clip_G * gamma / math.sqrt(2.0 * params.rho)
    if beta.T < T:
        raise ValueError(f"beta horizon {beta.T} < T = {T}")
    tail_start = T - int(T * tail_frac)
    base = problem.seed if seed is None else seed
    prob = replace(problem, sigma_sgd=params.sigma_sgd)
    per = np.empty(trials)
    for k in range(trials):
        s = simulate_trace(prob, beta, eta, noise_std, T, _seed(base, k), tail_start)
        per[k] = 2.0 * float(np.mean(s))
    return Estimate(float(per.mean()), bootstrap_stderr(per), per)


def _seed(base, *more):
    if isinstance(base, (tuple, list)):
        return tuple(base) + tuple(more)
    return (int(base),) + tuple(more)


def lti_variance_check(a: float, sigma: float = 1.0, T: int = 20000, trials: int = 64, seed: int = 0) -> LTICheck:
    """delta_{t+1} = (1-a) delta_t + a sigma u_t; tail variance vs a sigma^2 / (2 - a).

    The stderr treats per-trial tail means as independent samples.
    """
    if not (0.0 < a <= 1.0):
        raise ValueError("need 0 < a <= 1 for a contraction")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    u = rng.standard_normal((trials, T))
    x = lfilter([0.0, a * sigma], [1.0, -(1.0 - a)], u, axis=1)
    tail = x[:, T // 2:] ** 2
    per = tail.mean(axis=1)
    return LTICheck(float(per.mean()), a * sigma * sigma / (2.0 - a), float(per.std(ddof=1) / math.sqrt(trials)))


# -- sweeps ------------------------------------------------------------------

@dataclass
class SweepConfig:
    d: int = 128
    alpha: float = 1.0
    eta: float = 0.02
    rho: float = 1.0
    clip_G: float = 1.0
    sigma_sgd: float = 0.0
    trials: int = 8
    T: int | None = None
    nu: float | None = None  # None: eta * mu
    seed: int = 0
    covariates: str = "gaussian"
    algorithms: tuple = ALGORITHMS
    workers: int | None = None


@dataclass
class SweepResult:
    axis: str
    rows: list
    fits: dict
    theory_fits: dict
    excluded: list = field(default_factory=list)


def _point_config(axis: str, value: float, base: SweepConfig) -> SweepConfig:
    if axis == "dimension":
        return replace(base, d=int(value))
    if axis == "eigen_decay":
        return replace(base, alpha=float(value))
    if axis == "learning_rate":
        return replace(base, eta=float(value))
    raise ValueError(f"axis must be dimension, eigen_decay or learning_rate, got {axis!r}")


def _x_value(axis: str, cfg: SweepConfig, sp: Spectrum) -> float:
    return {"dimension": cfg.d, "eigen_decay": effective_dim(sp), "learning_rate": cfg.eta}[axis]


def _job(args):
    cfg, alg, gi, trial = args
    sp = Spectrum.power_decay(cfg.d, cfg.alpha)
    T = cfg.T or default_horizon(cfg.eta, sp.mu)
    nu = cfg.nu if cfg.nu is not None else min(cfg.eta * sp.mu, 0.999)
    beta, gamma = _family_beta(alg, nu, T)
    prob = LinRegProblem(sp, sigma_sgd=cfg.sigma_sgd, covariates=cfg.covariates)
    noise_std = cfg.clip_G * gamma / math.sqrt(2.0 * cfg.rho)
    tail_start = T - T // 4
    try:
        s = simulate_trace(prob, beta, cfg.eta, noise_std, T, (cfg.seed, gi, trial), tail_start)
    except DivergenceError as e:
        return None, e.step
    return 2.0 * float(np.mean(s)), None


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("CORRNOISE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep(axis: str, grid: Sequence[float], base: SweepConfig | None = None) -> SweepResult:
    """Stationary estimates over a grid and log-log slopes per algorithm.

    Trials of the two algorithms share seeds (common random numbers). Grid
    points where a run diverges are excluded from the fits and reported.
    """
    base = base or SweepConfig()
    grid = list(grid)
    if len(grid) < 4:
        raise ValueError("a sweep grid needs at least 4 points")
    cfgs = [_point_config(axis, v, base) for v in grid]
    jobs = [(c, alg, gi, k) for gi, c in enumerate(cfgs) for alg in base.algorithms for k in range(c.trials)]
    nw = worker_count(base.workers)
    if nw > 1:
        with ProcessPoolExecutor(max_workers=nw) as ex:
            out = list(ex.map(_job, jobs))
    else:
        out = [_job(j) for j in jobs]
    res = {}
    for (c, alg, gi, k), o in zip(jobs, out):
        res.setdefault((gi, alg), []).append(o)

    rows, excluded = [], []
    xs = {alg: [] for alg in base.algorithms}
    ys = {alg: [] for alg in base.algorithms}
    tx = {alg: [] for alg in base.algorithms}
    ty = {alg: [] for alg in base.algorithms}
    for gi, (v, c) in enumerate(zip(grid, cfgs)):
        sp = Spectrum.power_decay(c.d, c.alpha)
        x = _x_value(axis, c, sp)
        for alg in base.algorithms:
            vals = res[(gi, alg)]
            div = [st for _, st in vals if st is not None]
            theory = _theory_value(alg, c, sp)
            if div:
                excluded.append({"axis_value": v, "algorithm": alg, "diverged_at_step": div[0]})
                continue
            per = np.array([e for e, _ in vals])
            est, se = float(per.mean()), bootstrap_stderr(per)
            rows.append({"axis_value": v, "x": x, "algorithm": alg, "estimate": est, "stderr": se,
                         "theory_lower": theory})
            xs[alg].append(x)
            ys[alg].append(est)
            if theory is not None and math.isfinite(theory):
                tx[alg].append(x)
                ty[alg].append(theory)
    fits = {a: fit_loglog(xs[a], ys[a]) for a in base.algorithms if len(xs[a]) >= 2}
    tfits = {a: fit_loglog(tx[a], ty[a]) for a in base.algorithms if len(tx[a]) >= 2}
    return SweepResult(axis, rows, fits, tfits, excluded)


def _theory_value(alg, c: SweepConfig, sp: Spectrum):
    """Lower bound of the analysis module for the same point (None outside eta < 1/R^2)."""
    params = ProblemParams(c.eta, c.rho, c.clip_G, c.sigma_sgd)
    nu = c.nu if c.nu is not None else min(c.eta * sp.mu, 0.999)
    prof = ("dpsgd", None) if alg == "noisy_sgd" else ("nu", nu)
    try:
        return linreg_finf_lower(prof, sp, params)
    except ValueError:
        return None
