"""Quadrature on [-pi, pi], elliptic integrals and the closed-form integrals
used by the analysis modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _sp_integrate

OVERFLOW_GUARD = 1e12
REFINE_WINDOW = math.pi / 64


class QuadratureError(ArithmeticError):
    """A quadrature node produced a non-finite integrand value."""

    def __init__(self, omega: float, value: float):
        super().__init__(f"non-finite integrand value {value!r} at omega={omega!r}")
        self.omega = omega
        self.value = value


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite 5-point Gauss-Legendre rule on [-pi, pi].

    With `refinement` on, 0 is always a breakpoint and the panels touching it
    are graded dyadically `levels` times, so the innermost panel has width
    h / 2**levels. Only panels inside |omega| <= pi/64 are ever refined.
    """

    panel_count: int = 4096
    refinement: bool = True
    abs_tol: float = 1e-9
    levels: int = 8

    def __post_init__(self):
        if int(self.panel_count) != self.panel_count or self.panel_count < 16:
            raise ValueError("panel_count must be an integer >= 16")
        if self.abs_tol <= 0:
            raise ValueError("abs_tol must be positive")
        if self.levels < 0:
            raise ValueError("levels must be nonnegative")


DEFAULT_QUAD = QuadratureSpec()


@lru_cache(maxsize=32)
def _breakpoints(panel_count: int, refinement: bool, levels: int) -> np.ndarray:
    edges = np.linspace(-math.pi, math.pi, panel_count + 1)
    if not refinement:
        return edges
    if not np.any(edges == 0.0):
        edges = np.sort(np.append(edges, 0.0))
    i0 = int(np.flatnonzero(edges == 0.0)[0])
    extra = []
    for nb in (edges[i0 - 1], edges[i0 + 1]):
        h = min(abs(nb), REFINE_WINDOW)
        extra.extend(math.copysign(h / 2.0**j, nb) for j in range(1, levels + 1))
        if h < abs(nb):
            extra.append(math.copysign(h, nb))
    return np.unique(np.concatenate((edges, extra)))


@lru_cache(maxsize=32)
def _nodes_weights(panel_count: int, refinement: bool, levels: int):
    x, w = np.polynomial.legendre.leggauss(5)
    e = _breakpoints(panel_count, refinement, levels)
    half = 0.5 * np.diff(e)
    mid = 0.5 * (e[1:] + e[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).reshape(-1)
    weights = (half[:, None] * w[None, :]).reshape(-1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def nodes_weights(quad: QuadratureSpec = DEFAULT_QUAD):
    """Nodes and weights of the composite rule (read-only arrays)."""
    return _nodes_weights(int(quad.panel_count), bool(quad.refinement), int(quad.levels))


def _eval(f: Callable, nodes: np.ndarray) -> np.ndarray:
    vals = np.broadcast_to(np.asarray(f(nodes), dtype=float), nodes.shape)
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise QuadratureError(float(nodes[i]), float(vals[i]))
    return vals


def integrate(f: Callable[[np.ndarray], np.ndarray], quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Integral of a vectorized f over [-pi, pi]."""
    nodes, weights = nodes_weights(quad)
    return float(np.dot(weights, _eval(f, nodes)))


def integrate_or_inf(f: Callable, quad: QuadratureSpec = DEFAULT_QUAD, extra_levels: int = 4,
                     growth_tol: float = 1e-3) -> float:
    """Integral of a nonnegative f that may diverge at omega = 0.

    Returns math.inf when the value exceeds OVERFLOW_GUARD, when a node value
    overflows, or when refining `extra_levels` deeper towards 0 keeps growing
    the value (the signature of a 1/|omega| or 1/omega^2 singularity).
    """
    try:
        v = integrate(f, quad)
    except QuadratureError as e:
        if math.isinf(e.value) and e.value > 0:
            return math.inf
        raise
    if v > OVERFLOW_GUARD:
        return math.inf
    if not quad.refinement:
        return v
    deeper = QuadratureSpec(quad.panel_count, True, quad.abs_tol, quad.levels + extra_levels)
    try:
        v2 = integrate(f, deeper)
    except QuadratureError:
        return math.inf
    if v2 > OVERFLOW_GUARD or v2 - v > growth_tol * abs(v) + quad.abs_tol:
        return math.inf
    return v


# -- elliptic integrals -----------------------------------------------------

def ellip_K(k: float) -> float:
    """Complete elliptic integral of the first kind K(k) (modulus k) by AGM."""
    k = float(k)
    if not (0.0 <= k < 1.0):
        raise ValueError(f"ellip_K requires 0 <= k < 1, got {k}")
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    for _ in range(64):
        if abs(a - b) <= 1e-15 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def ellip_Pi(alpha_sq: float, k: float) -> float:
    """Complete elliptic integral of the third kind Pi(alpha^2, k).

    Pi = int_0^{pi/2} dtheta / ((1 - alpha^2 sin^2) sqrt(1 - k^2 sin^2)),
    by adaptive quadrature.
    """
    alpha_sq, k = float(alpha_sq), float(k)
    if alpha_sq >= 1.0:
        raise ValueError(f"ellip_Pi requires alpha^2 < 1, got {alpha_sq}")
    if not (0.0 <= k < 1.0):
        raise ValueError(f"ellip_Pi requires 0 <= k < 1, got {k}")

    def f(th):
        s2 = math.sin(th) ** 2
        return 1.0 / ((1.0 - alpha_sq * s2) * math.sqrt(1.0 - k * k * s2))

    val, _ = _sp_integrate.quad(f, 0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


# -- closed-form integrals over [-pi, pi] ------------------------------------

def cos_kernel_integral(a: float, b: float, l: int) -> float:
    """int cos(l w) / (a^2 + b^2 - 2ab cos w) dw = 2pi/(a^2-b^2) (b/a)^|l|."""
    if not (0.0 < abs(b) < a):
        raise ValueError(f"need 0 < |b| < a, got a={a}, b={b}")
    return 2.0 * math.pi / (a * a - b * b) * (b / a) ** abs(int(l))


def inv_affine_cos_integral(a: float) -> float:
    """int dw / (1 + a cos w) = 2pi / sqrt(1 - a^2) for |a| < 1."""
    if not abs(a) < 1.0:
        raise ValueError(f"need |a| < 1, got {a}")
    return 2.0 * math.pi / math.sqrt(1.0 - a * a)


def _check_unit(name, x):
    if not (0.0 < x < 1.0):
        raise ValueError(f"{name} must lie in (0, 1), got {x}")


def inv_modulus_integral(a: float) -> float:
    """int dw / |1 - a - e^{iw}| = 4/(2-a) K(sqrt(1-a)/(1-a/2)), a in (0, 1]."""
    if not (0.0 < a <= 1.0):
        raise ValueError(f"a must lie in (0, 1], got {a}")
    return 4.0 / (2.0 - a) * ellip_K(math.sqrt(1.0 - a) / (1.0 - a / 2.0))


def integral_I_closed(a: float, b: float) -> float:
    """int |1-a-e^{iw}| / |1-b-e^{iw}|^2 dw from the elliptic closed forms."""
    _check_unit("a", a)
    _check_unit("b", b)
    k = math.sqrt(1.0 - a) / (1.0 - a / 2.0)
    if a == b:
        return 4.0 / (2.0 - a) * ellip_K(k)
    alpha_sq = (b * b * (1.0 - a) - a * a * (1.0 - b)) / (b * b * (1.0 - a / 2.0) ** 2)
    return 2.0 * a * a / (b * b * (1.0 - a / 2.0)) * ellip_Pi(alpha_sq, k)


def integral_I_quad(a: float, b: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    ra, rb = 1.0 - a, 1.0 - b

    def f(w):
        c = np.cos(w)
        return np.sqrt(1.0 + ra * ra - 2.0 * ra * c) / (1.0 + rb * rb - 2.0 * rb * c)

    return integrate(f, quad)


def integral_I(a: float, b: float, quad: QuadratureSpec | None = None) -> float:
    """I(a, b) = int |1-a-e^{iw}| / |1-b-e^{iw}|^2 dw for a, b in (0, 1).

    Evaluated in closed form. When `quad` is given the value is cross-checked
    against direct quadrature and a mismatch beyond quad.abs_tol (relative to
    max(1, I)) raises ArithmeticError.
    """
    val = integral_I_closed(a, b)
    if quad is not None:
        ref = integral_I_quad(a, b, quad)
        if abs(ref - val) > quad.abs_tol * max(1.0, abs(val)):
            raise ArithmeticError(f"I({a}, {b}) self-check failed: closed {val!r} vs quadrature {ref!r}")
    return val


# -- spectrum and spectral weight --------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of H, strictly positive and sorted descending."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float).reshape(-1)
        if ev.size == 0:
            raise ValueError("spectrum must be nonempty")
        if not np.all(np.isfinite(ev)) or np.any(ev <= 0):
            raise ValueError("eigenvalues must be finite and strictly positive")
        if np.any(np.diff(ev) > 0):
            raise ValueError("eigenvalues must be sorted descending")
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Spectrum":
        return cls(np.sort(np.asarray(values, dtype=float))[::-1])

    @classmethod
    def power_decay(cls, d: int, alpha: float = 1.0) -> "Spectrum":
        """lambda_k = k^(-alpha), k = 1..d."""
        return cls(np.arange(1, d + 1, dtype=float) ** (-float(alpha)))

    @property
    def d(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def L(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def mu(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    def unique(self):
        """Distinct eigenvalues and their multiplicities."""
        vals, counts = np.unique(self.eigenvalues, return_counts=True)
        return vals[::-1], counts[::-1]


def h_omega(spectrum: Spectrum, eta: float, omega):
    """h(w) = sum_j lambda_j / (1 + (1 - eta l_j)^2 - 2 (1 - eta l_j) cos w).

    eta * lambda_1 = 1 is accepted (the top mode then contributes lambda_1
    at every w); anything above is rejected.
    """
    if eta <= 0 or eta * spectrum.L > 1.0:
        raise ValueError(f"h_omega requires 0 < eta*lambda_1 <= 1, got {eta * spectrum.L}")
    lam, cnt = spectrum.unique()
    r = 1.0 - eta * lam
    w = np.asarray(omega, dtype=float)
    c = np.cos(w)[..., None]
    out = np.sum((cnt * lam) / (1.0 + r * r - 2.0 * r * c), axis=-1)
    return float(out) if out.ndim == 0 else out
