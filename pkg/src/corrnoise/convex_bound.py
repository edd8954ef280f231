"""Frequency-domain convex-program bound on F_inf for L-smooth, mu-strongly
convex losses, with a coordinate search plus smooth SLSQP polish over the
multipliers lambda and alternating minimization over the noise profile B.

For multipliers lambda_t >= 0 (t = -T_max..T_max, sum <= 2 lambda_0) with DTFT
Lambda, and A(w) = [[eta, 0], [1 - e^{iw}, -eta]],

    M(w) = A^H [[-mu L (Lam + conj Lam), mu Lam + L conj Lam],
                [mu conj Lam + L Lam,    -(Lam + conj Lam)]] A,

any psi with diag(-eta^2, psi) - M >= 0 certifies
E||theta - theta*||^2 <= (d / (2 pi eta^2)) int S(w) psi(w) dw for the noise
PSD bound S. The reported bound is L times that, i.e. it is on the
E||theta - theta*||_H^2 scale used by the analysis module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .toeplitz import sensitivity_inf

INFEASIBLE = math.inf
_N11_FLOOR = 1e-12
_PSI_MARGIN = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class MultiplierSeq:
    """lambda_t for t = -T_max..T_max (index T_max holds lambda_0)."""

    lam: np.ndarray

    def __post_init__(self):
        v = np.array(self.lam, dtype=float).reshape(-1)
        if v.size % 2 != 1:
            raise ValueError("multiplier window must have odd length 2 T_max + 1")
        if np.any(v < 0):
            raise ValueError("multipliers must be nonnegative")
        tm = v.size // 2
        if v.sum() > 2.0 * v[tm] * (1.0 + 1e-12) + 1e-300:
            raise ValueError("multipliers must satisfy sum lambda <= 2 lambda_0")
        v.setflags(write=False)
        object.__setattr__(self, "lam", v)

    @property
    def T_max(self) -> int:
        return self.lam.size // 2

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.T_max, self.T_max + 1)

    @property
    def support(self) -> list[int]:
        return [int(t) for t in self.offsets[self.lam > 0]]

    @classmethod
    def spike(cls, T_max: int, c: float = 1.0) -> "MultiplierSeq":
        v = np.zeros(2 * T_max + 1)
        v[T_max] = c
        return cls(v)

    @classmethod
    def zeros(cls, T_max: int) -> "MultiplierSeq":
        return cls(np.zeros(2 * T_max + 1))


@dataclass(frozen=True)
class ConvexClass:
    mu: float
    L: float
    eta: float
    G: float = 1.0
    sigma_sgd: float = 0.0
    rho: float = 1.0
    d: int = 1

    def __post_init__(self):
        if not (0 < self.mu <= self.L):
            raise ValueError("need 0 < mu <= L")
        if self.eta <= 0 or self.G <= 0 or self.rho <= 0 or self.sigma_sgd < 0 or self.d < 1:
            raise ValueError("need eta, G, rho > 0, sigma_sgd >= 0, d >= 1")

    @property
    def kappa(self) -> float:
        return self.L / self.mu


def omega_grid(k: int) -> np.ndarray:
    """Uniform midpoint grid of k points on [-pi, pi]."""
    return -math.pi + (np.arange(k) + 0.5) * (2.0 * math.pi / k)


class GridProfile:
    """|B(w)|^2 given by its values on a midpoint grid, piecewise constant."""

    def __init__(self, values: np.ndarray):
        v = np.asarray(values, dtype=float).reshape(-1)
        if v.size < 2 or np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("grid profile values must be finite and positive")
        self.values = v
        self.k = v.size

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        j = np.clip(np.floor((w + math.pi) / (2.0 * math.pi) * self.k).astype(int), 0, self.k - 1)
        return self.values[j]

    def gamma_sq(self) -> float:
        return float(np.mean(1.0 / self.values))


def _gamma_sq(bmagsq) -> float:
    if isinstance(bmagsq, GridProfile):
        return bmagsq.gamma_sq()
    g = sensitivity_inf(bmagsq)
    return math.inf if math.isinf(g) else g * g


def lambda_dtft(lam: MultiplierSeq, omega) -> np.ndarray:
    """Lambda(w) = sum_t lambda_t e^{-i w t} over the finite window."""
    w = np.asarray(omega, dtype=float)
    out = np.exp(-1j * np.multiply.outer(w, lam.offsets)) @ lam.lam
    return complex(out) if w.ndim == 0 else out


def _blocks(Lam: np.ndarray, omega: np.ndarray, cls: ConvexClass):
    """Entries M11, M12, M22 of A^H Mtilde A (vectorized over w)."""
    eta, mu, L = cls.eta, cls.mu, cls.L
    s = 1.0 - np.exp(1j * omega)
    re2 = 2.0 * Lam.real
    m11t = -mu * L * re2
    m12t = mu * Lam + L * np.conj(Lam)
    m21t = mu * np.conj(Lam) + L * Lam
    m22t = -re2
    # A columns: a1 = (eta, s), a2 = (0, -eta)
    M11 = (eta * eta * m11t + eta * (m12t * s + np.conj(s) * m21t) + (np.abs(s) ** 2) * m22t).real
    M12 = -eta * (eta * m12t + np.conj(s) * m22t)
    M22 = eta * eta * m22t
    return M11, M12, M22


def _psi_from_blocks(M11, M12, M22, eta):
    N11 = -eta * eta - M11
    with np.errstate(divide="ignore", invalid="ignore"):
        psi = M22 + np.abs(M12) ** 2 / N11
        # rounding margin so that N(psi) is PSD in floating point, not only in exact arithmetic
        psi = psi + _PSI_MARGIN * (np.abs(N11) + 2.0 * np.abs(M12) + np.abs(M22) + np.abs(psi))
    feas = N11 > _N11_FLOOR * eta * eta
    psi = np.where(feas, np.maximum(psi, 0.0), INFEASIBLE)
    return psi


def min_psi(omega, lam: MultiplierSeq, cls: ConvexClass):
    """Smallest psi >= 0 with diag(-eta^2, psi) - M(w) PSD; math.inf if none.

    The value carries a margin of 64 ulp of the block magnitudes so the PSD
    certificate survives rounding.
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    M11, M12, M22 = _blocks(lambda_dtft(lam, w), w, cls)
    out = _psi_from_blocks(M11, M12, M22, cls.eta)
    return float(out[0]) if np.ndim(omega) == 0 else out


def certificate_min_eig(omega, lam: MultiplierSeq, psi, cls: ConvexClass) -> np.ndarray:
    """Smallest eigenvalue of N(w) = diag(-eta^2, psi) - M(w), by eigvalsh."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    M11, M12, M22 = _blocks(lambda_dtft(lam, w), w, cls)
    N = np.empty((w.size, 2, 2), dtype=complex)
    N[:, 0, 0] = -cls.eta ** 2 - M11
    N[:, 0, 1] = -M12
    N[:, 1, 0] = -np.conj(M12)
    N[:, 1, 1] = np.broadcast_to(psi, w.shape) - M22
    return np.linalg.eigvalsh(N)[:, 0]


def noise_psd(bmagsq, cls: ConvexClass, omega: np.ndarray, gamma_sq: float | None = None) -> np.ndarray:
    """S(w) = (sqrt(G^2 gamma^2 |B|^2 / (2 rho)) + sigma_sgd)^2."""
    g2 = _gamma_sq(bmagsq) if gamma_sq is None else gamma_sq
    dp = cls.G ** 2 * g2 * np.asarray(bmagsq(omega), dtype=float) / (2.0 * cls.rho)
    return (np.sqrt(dp) + cls.sigma_sgd) ** 2


class _Problem:
    """Bound as a function of the multiplier vector for a fixed profile.

    Uses the half grid (w > 0) when k is even: for real multipliers
    psi_min(-w) = psi_min(w).
    """

    def __init__(self, bmagsq, cls: ConvexClass, grid_k: int, T_max: int, gamma_sq=None):
        if grid_k < 64:
            raise ValueError("grid_k must be >= 64")
        self.cls = cls
        self.k = grid_k
        w = omega_grid(grid_k)
        if grid_k % 2 == 0:
            self.w, self.mult = w[grid_k // 2:], 2.0
        else:
            self.w, self.mult = w, 1.0
        self.T_max = T_max
        self.offsets = np.arange(-T_max, T_max + 1)
        self.E = np.exp(-1j * np.multiply.outer(self.w, self.offsets))
        g2 = _gamma_sq(bmagsq) if gamma_sq is None else gamma_sq
        self.gamma_sq = g2
        self.S = noise_psd(bmagsq, cls, self.w, g2) if math.isfinite(g2) else None
        self.scale = cls.L * cls.d / (2.0 * math.pi * cls.eta ** 2) * (2.0 * math.pi / grid_k) * self.mult
        self.evals = 0
        # N11 is affine in lambda: N11 = -eta^2 - D @ lam
        self.D = np.stack([self._m11(np.eye(1, self.offsets.size, i).ravel()) for i in range(self.offsets.size)], 1)

    def _m11(self, v):
        Lam = self.E @ v
        return _blocks(Lam, self.w, self.cls)[0]

    def psi(self, v: np.ndarray) -> np.ndarray:
        return self.psi_lam(self.E @ v)

    def psi_lam(self, Lam: np.ndarray) -> np.ndarray:
        return _psi_from_blocks(*_blocks(Lam, self.w, self.cls), self.cls.eta)

    def value(self, v: np.ndarray) -> float:
        return self.value_lam(self.E @ v)

    def value_lam(self, Lam: np.ndarray) -> float:
        self.evals += 1
        if self.S is None:
            return math.inf
        p = self.psi_lam(Lam)
        if not np.all(np.isfinite(p)):
            return math.inf
        return float(self.scale * np.dot(self.S, p))

    def coord_interval(self, v: np.ndarray, i: int) -> tuple[float, float]:
        """Feasible range of coordinate i with the others fixed."""
        eta2 = self.cls.eta ** 2
        tm = self.T_max
        rest = -eta2 - self.D @ v + self.D[:, i] * v[i]  # N11 without coordinate i
        di = self.D[:, i]
        need = rest - _N11_FLOOR * eta2 * 2.0  # rest - x di >= floor
        lo, hi = 0.0, math.inf
        pos, neg = di > 0, di < 0
        if np.any(pos):
            hi = min(hi, float(np.min(need[pos] / di[pos])))
        if np.any(neg):
            lo = max(lo, float(np.max(need[neg] / di[neg])))
        if np.any((di == 0) & (need < 0)):
            return 1.0, 0.0
        others = float(v.sum() - v[tm] - (v[i] if i != tm else 0.0))
        if i == tm:
            lo = max(lo, others)
        else:
            hi = min(hi, v[tm] - others)
        return lo, hi


def _golden(f, a, b, iters=48):
    g = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def project(v: np.ndarray, T_max: int) -> np.ndarray:
    """Clip negatives to 0, then shrink the tail so that sum <= 2 lambda_0."""
    v = np.maximum(np.asarray(v, dtype=float), 0.0)
    tail = v.sum() - v[T_max]
    if tail > v[T_max] > 0:
        f = v[T_max] / tail
        v = v * f
        v[T_max] /= f
    elif v[T_max] == 0:
        v = np.zeros_like(v)
    return v


@dataclass
class LambdaResult:
    lam: MultiplierSeq
    bound: float
    iterations: int
    history: list = field(default_factory=list)
    gamma_sq: float = float("nan")

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.bound)


def _smooth_polish(prob: _Problem, v0: np.ndarray, width: int) -> np.ndarray:
    """SLSQP over the offsets |t| <= width on the unclipped objective.

    The unclipped objective is convex in lambda (affine plus a perspective
    term) and smooth on N11 > 0, so a local method started from a feasible
    point heads for the global optimum of the unclipped program. Where the
    clip psi >= 0 binds the two programs differ; the caller keeps the result
    only if the clipped bound improves. Offsets outside the window stay fixed.
    """
    cls, tm = prob.cls, prob.T_max
    eta2 = cls.eta ** 2
    idx = np.arange(tm - width, tm + width + 1)
    cols = [_blocks(prob.E[:, i], prob.w, cls) for i in idx]
    A11 = np.stack([b[0] for b in cols], 1)
    A12 = np.stack([b[1] for b in cols], 1)
    A22 = np.stack([b[2] for b in cols], 1)
    re, im = A12.real, A12.imag
    rest = v0.copy()
    rest[idx] = 0.0
    M11r, M12r, M22r = _blocks(prob.E @ rest, prob.w, cls)
    y0, p0, q0 = -eta2 - M11r, M12r.real, M12r.imag
    c = max(v0[tm], 1e-300)
    wS = prob.scale * prob.S / max(prob.value(v0), 1e-300)
    floor = 4.0 * _N11_FLOOR * eta2
    n = idx.size

    def fg(z):
        x = c * z
        y = y0 - A11 @ x
        if np.any(y <= 0):
            return math.inf, np.zeros(n)
        p, q = p0 + re @ x, q0 + im @ x
        up, uq = p / y, q / y
        val = wS @ (M22r + A22 @ x + p * up + q * uq)
        grad = wS @ (A22 + 2.0 * (up[:, None] * re + uq[:, None] * im) + (up * up + uq * uq)[:, None] * A11)
        return float(val), c * grad

    tail = -np.ones(n)
    tail[width] = 1.0
    slack = (rest[tm] - (rest.sum() - rest[tm])) / c
    cons = [{"type": "ineq", "fun": lambda z: y0 - floor - c * (A11 @ z), "jac": lambda z: -c * A11},
            {"type": "ineq", "fun": lambda z: np.array([tail @ z + slack]), "jac": lambda z: tail[None, :]}]
    z, fz = v0[idx] / c, math.inf
    for _ in range(8):
        with np.errstate(all="ignore"):
            r = minimize(fg, z, jac=True, method="SLSQP", bounds=[(0.0, None)] * n, constraints=cons,
                         options={"maxiter": 500, "ftol": 1e-12})
        ok = bool(np.all(np.isfinite(r.x)) and math.isfinite(r.fun))
        if ok and r.fun < fz - 1e-10 * abs(fz if math.isfinite(fz) else r.fun):
            # SLSQP stops early on badly scaled steps; restart from its point
            z, fz = np.maximum(r.x, 0.0), r.fun
            continue
        if ok or r.status == 0:
            break
        # the QP subproblem can fail at a vertex; retry from a point pulled toward the spike
        z = 0.95 * z
        z[width] = v0[tm] / c
    out = rest.copy()
    out[idx] = c * z
    return project(out, tm)


def optimize_lambda(bmagsq, cls: ConvexClass, grid_k: int = 1000, T_max: int = 64, budget: int = 12,
                    init: MultiplierSeq | None = None, gamma_sq: float | None = None) -> LambdaResult:
    """Minimize the bound over feasible multipliers.

    A spike scan lambda = c e_0 over c in [1e-3, 1e6] (skipped when `init` is
    given) is followed by at most `budget` coordinate-descent sweeps with
    exact feasible intervals and golden-section line searches, SLSQP solves of
    the smooth (unclipped) program over widening windows |t| <= 16, 32, ...,
    T_max, and a Nelder-Mead polish of the central coordinates. `iterations` counts the scan, the sweeps and the polishes.
    The incumbent never gets worse; budget = 0 evaluates the starting point
    only.
    """
    if T_max < 1:
        raise ValueError("T_max must be >= 1")
    prob = _Problem(bmagsq, cls, grid_k, T_max, gamma_sq)
    n = 2 * T_max + 1
    tm = T_max
    if init is not None:
        if init.T_max != T_max:
            v = np.zeros(n)
            m = min(init.T_max, T_max)
            v[tm - m:tm + m + 1] = init.lam[init.T_max - m:init.T_max + m + 1]
            best = project(v, T_max)
        else:
            best = init.lam.copy()
    else:
        best = np.zeros(n)
        best[tm] = 1.0
    fbest = prob.value(best)
    history = [fbest]
    it = 0
    if prob.S is None:
        return LambdaResult(MultiplierSeq(best), math.inf, 0, history, prob.gamma_sq)

    if init is None and it < budget:
        it += 1
        for c in np.logspace(-3, 6, 37):
            v = np.zeros(n)
            v[tm] = c
            fv = prob.value(v)
            if fv < fbest:
                best, fbest = v, fv
        if math.isfinite(fbest):
            # refine the spike height
            c0 = best[tm]

            def fs(x):
                v = np.zeros(n)
                v[tm] = math.exp(x)
                return prob.value(v)

            x, fx = _golden(fs, math.log(c0) - 0.6, math.log(c0) + 0.6, 40)
            if fx < fbest:
                best = np.zeros(n)
                best[tm] = math.exp(x)
                fbest = fx
        history.append(fbest)

    # coordinate sweeps, centre outwards
    order = [tm] + [tm + s * j for j in range(1, T_max + 1) for s in (1, -1)]
    sweeps = 0
    while sweeps < budget and math.isfinite(fbest):
        sweeps += 1
        start = fbest
        for i in order:
            lo, hi = prob.coord_interval(best, i)
            if not (hi > lo):
                continue
            if not math.isfinite(hi):
                hi = max(4.0 * best[i], lo + 1.0)
            # Lambda is linear in lambda: update it along one column only
            Lam0 = prob.E @ best - prob.E[:, i] * best[i]
            col = prob.E[:, i]

            def f1(x, Lam0=Lam0, col=col):
                return prob.value_lam(Lam0 + x * col)

            x, fx = _golden(f1, lo, hi)
            if fx < fbest:
                best = best.copy()
                best[i] = x
                fbest = fx
        history.append(fbest)
        if fbest > start * (1.0 - 1e-6):
            break
    it += sweeps

    if budget > 0 and math.isfinite(fbest):
        # widen the window in steps so each solve starts from the previous optimum
        for width in sorted({min(w, T_max) for w in (16, 32, 64, 128, 256)} | {T_max}):
            if width > T_max:
                break
            it += 1
            v = _smooth_polish(prob, best, width)
            fv = prob.value(v)
            if fv < fbest:
                best, fbest = v, fv
            history.append(fbest)

    if budget > 0 and math.isfinite(fbest):
        it += 1
        m = min(3, T_max)
        idx = np.arange(tm - m, tm + m + 1)
        base = best.copy()
        sc = max(best[tm], 1e-300)

        def fnm(z):
            v = base.copy()
            v[idx] = np.abs(z) * sc
            v = project(v, T_max)
            return prob.value(v)

        r = minimize(fnm, best[idx] / sc, method="Nelder-Mead",
                     options={"maxfev": 400, "xatol": 1e-10, "fatol": 1e-14 * fbest})
        if r.fun < fbest:
            v = base.copy()
            v[idx] = np.abs(r.x) * sc
            best = project(v, T_max)
            fbest = prob.value(best)
        history.append(fbest)

    return LambdaResult(MultiplierSeq(best), fbest, it, history, prob.gamma_sq)


def bound_value(bmagsq, lam: MultiplierSeq, cls: ConvexClass, grid_k: int = 1000,
                gamma_sq: float | None = None) -> float:
    """(L d / (2 pi eta^2)) sum_grid S(w) psi_min(w) dw; math.inf if infeasible."""
    prob = _Problem(bmagsq, cls, grid_k, lam.T_max, gamma_sq)
    return prob.value(lam.lam)


def optimize_B(psi: np.ndarray, cls: ConvexClass | None = None) -> GridProfile:
    """|B|^2 proportional to 1/sqrt(psi) on the grid, with |B|^2 = 1 at the cell nearest pi.

    This is the Cauchy-Schwarz equality case of gamma^2 * int |B|^2 psi.
    """
    p = np.asarray(psi, dtype=float).reshape(-1)
    if np.any(~np.isfinite(p)) or np.any(p <= 0):
        raise ValueError("psi must be finite and strictly positive on the grid")
    b = 1.0 / np.sqrt(p)
    return GridProfile(b / b[-1])


@dataclass
class AltMinResult:
    profile: Callable
    lam: MultiplierSeq
    bound: float
    rounds: int
    history: list


def psi_on_grid(lam: MultiplierSeq, cls: ConvexClass, grid_k: int) -> np.ndarray:
    return np.asarray(min_psi(omega_grid(grid_k), lam, cls))


def alternating_minimization(init_profile, cls: ConvexClass, grid_k: int = 1000, T_max: int = 64,
                             rounds: int = 20, rtol: float = 1e-4, budget: int = 12) -> AltMinResult:
    """Alternate lambda (hence psi) for fixed B with B = optimize_B(psi).

    Stops after `rounds` rounds or when the relative change drops below rtol;
    a round that would increase the bound is rejected.
    """
    r = optimize_lambda(init_profile, cls, grid_k, T_max, budget)
    prof, lam, best = init_profile, r.lam, r.bound
    history = [best]
    done = 0
    for _ in range(rounds):
        if not math.isfinite(best):
            break
        psi = psi_on_grid(lam, cls, grid_k)
        pos = psi[psi > 0]
        if pos.size == 0:
            break
        psi = np.maximum(psi, 1e-12 * pos.max())
        newprof = optimize_B(psi, cls)
        r = optimize_lambda(newprof, cls, grid_k, T_max, budget, init=lam)
        done += 1
        if not (r.bound < best):
            break
        change = (best - r.bound) / best
        prof, lam, best = newprof, r.lam, r.bound
        history.append(best)
        if change < rtol:
            break
    return AltMinResult(prof, lam, best, done, history)
