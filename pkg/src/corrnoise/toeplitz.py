"""Lower-triangular Toeplitz operator algebra: inversion, sensitivity, DTFT
and streaming application of correlated noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coeffs import CoeffSeq
from .spectral import DEFAULT_QUAD, QuadratureSpec, integrate_or_inf


@dataclass(frozen=True)
class InverseSeq:
    """First column c of B^{-1} (again lower-triangular Toeplitz)."""

    values: np.ndarray

    @property
    def T(self) -> int:
        return int(self.values.size)


def _as_beta(beta) -> np.ndarray:
    if isinstance(beta, CoeffSeq):
        return beta.values
    b = np.asarray(beta, dtype=float).reshape(-1)
    if b.size == 0 or b[0] == 0.0:
        raise ValueError("beta_0 must be nonzero")
    return b


def invert_first_column(beta) -> InverseSeq:
    """c_0 = 1/beta_0, c_t = -(1/beta_0) sum_{k=1..t} beta_k c_{t-k}. O(T^2)."""
    b = _as_beta(beta)
    T = b.size
    c = np.zeros(T)
    c[0] = 1.0 / b[0]
    for t in range(1, T):
        # beta_1..beta_t against c_{t-1}..c_0
        c[t] = -c[0] * np.dot(b[1:t + 1], c[t - 1::-1])
    c.setflags(write=False)
    return InverseSeq(c)


def sensitivity_T(beta) -> float:
    """gamma_T = max column norm of B^{-1}, attained by the first column."""
    return float(np.linalg.norm(invert_first_column(beta).values))


def dtft(beta, omega) -> np.ndarray:
    """B(w) = sum_t beta_t e^{-i w t}, Horner over t, vectorized over w."""
    b = _as_beta(beta)
    w = np.asarray(omega, dtype=float)
    z = np.exp(-1j * w)
    acc = np.full(w.shape, b[-1], dtype=complex)
    for bt in b[-2::-1]:
        acc = acc * z + bt
    return acc


def dtft_magnitude_sq(beta, omega):
    """|B(w)|^2, accumulated in complex arithmetic."""
    out = np.abs(dtft(beta, omega)) ** 2
    return float(out) if out.ndim == 0 else out


def bmagsq_of(beta) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized omega -> |B(omega)|^2 for a finite sequence."""
    b = _as_beta(beta).copy()
    return lambda w: np.abs(dtft(b, w)) ** 2


def sensitivity_inf(bmagsq: Callable[[np.ndarray], np.ndarray],
                    quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """gamma_inf = ((1/2pi) int |B|^{-2})^{1/2}; math.inf when it diverges."""

    def inv(w):
        with np.errstate(divide="ignore"):
            return 1.0 / np.asarray(bmagsq(w), dtype=float)

    v = integrate_or_inf(inv, quad)
    if math.isinf(v):
        return math.inf
    return math.sqrt(v / (2.0 * math.pi))


class NoiseStream:
    """Streaming application of B to raw Gaussian draws.

    Step t emits sum_{tau<=t} beta_tau w_{t-tau} at O(t d) cost. With
    `window` set, only the latest `window` draws are kept (approximation).
    """

    def __init__(self, beta, d: int, window: int | None = None):
        self.beta = _as_beta(beta).copy()
        self.T = self.beta.size
        self.d = int(d)
        self.window = None if window is None else int(window)
        cap = self.T if window is None else min(self.T, self.window)
        self._hist = np.zeros((cap, self.d))
        self.t = 0

    def push(self, raw_draw: np.ndarray) -> np.ndarray:
        if self.t >= self.T:
            raise IndexError(f"noise stream exhausted at horizon T={self.T}")
        w = np.asarray(raw_draw, dtype=float).reshape(self.d)
        cap = self._hist.shape[0]
        slot = self.t % cap
        self._hist[slot] = w
        n = min(self.t + 1, cap)
        # history slots for w_t, w_{t-1}, ..., w_{t-n+1}
        idx = (slot - np.arange(n)) % cap
        out = self.beta[:n] @ self._hist[idx]
        self.t += 1
        return out

    @property
    def raw_history(self) -> np.ndarray:
        """Raw draws in time order (only the retained window)."""
        cap = self._hist.shape[0]
        n = min(self.t, cap)
        idx = (self.t - n + np.arange(n)) % cap
        return self._hist[idx].copy()


def stream_noise(stream: NoiseStream, raw_draw: np.ndarray) -> np.ndarray:
    return stream.push(raw_draw)


def correlate(beta, raw: np.ndarray) -> np.ndarray:
    """Apply B to a whole (T, d) block of raw draws at once (FFT convolution)."""
    from scipy.signal import fftconvolve

    b = _as_beta(beta)
    raw = np.asarray(raw, dtype=float)
    T = raw.shape[0]
    kern = b[:T]
    if raw.ndim == 1:
        return fftconvolve(raw, kern)[:T]
    return fftconvolve(raw, kern[:, None], axes=0)[:T]
