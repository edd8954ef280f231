"""Noise-coefficient sequences for correlated-noise DP-FTRL.

A coefficient sequence beta = (beta_0, ..., beta_{T-1}) is the first column of
the lower-triangular Toeplitz matrix B; the noise injected at step t is
sum_tau beta_tau * w_{t - tau}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

FAMILIES = ("dpsgd", "nu", "mean_optimal", "anti_pgd", "anti_pgd_damped", "fichtenberger")
DEFAULT_T = 2048


@dataclass(frozen=True)
class CoeffSeq:
    """Finite coefficient sequence, always materialized to its horizon T."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size < 1:
            raise ValueError("coefficient sequence must have length >= 1")
        if v[0] == 0.0:
            raise ValueError("beta_0 must be nonzero (B must be invertible)")
        if not np.all(np.isfinite(v)):
            raise ValueError("coefficients must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def T(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.T

    def __eq__(self, other):
        if not isinstance(other, CoeffSeq):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


def frac_binom(t: int) -> float:
    """Generalized binomial coefficient binom(1/2, t) by running product."""
    if t < 0 or int(t) != t:
        raise ValueError(f"t must be a nonnegative integer, got {t}")
    b = 1.0
    for k in range(1, int(t) + 1):
        b *= (0.5 - (k - 1)) / k
    return b


def frac_binom_seq(T: int) -> np.ndarray:
    """binom(1/2, t) for t = 0..T-1, same recurrence vectorized via cumprod."""
    k = np.arange(1, T, dtype=float)
    return np.concatenate(([1.0], np.cumprod((1.5 - k) / k)))


def _nu_values(nu: float, T: int) -> np.ndarray:
    t = np.arange(T)
    # (-1)^t binom(1/2, t) (1-nu)^t, with the sign folded into the recurrence
    signs = np.where(t % 2 == 0, 1.0, -1.0)
    return signs * frac_binom_seq(T) * (1.0 - nu) ** t


def _check_open_unit(name: str, param) -> float:
    if param is None or not (0.0 < float(param) < 1.0):
        raise ValueError(f"{name} requires 0 < param < 1, got {param}")
    return float(param)


def make_coeffs(family: str, param: float | None = None, T: int = DEFAULT_T) -> CoeffSeq:
    """Build the coefficient sequence of a named family.

    Args:
        family: one of FAMILIES.
        param: nu for `nu` (0 <= nu < 1) and `anti_pgd_damped` (0 < nu < 1), the learning
            rate for `mean_optimal` (0 < eta <= 1); ignored otherwise.
        T: horizon, T >= 1.
    """
    if int(T) != T or T < 1:
        raise ValueError(f"T must be a positive integer, got {T}")
    T = int(T)
    v = np.zeros(T)
    if family == "dpsgd":
        v[0] = 1.0
    elif family == "nu":
        # nu = 0 is admitted: it is the fichtenberger sequence
        if param is None or not (0.0 <= float(param) < 1.0):
            raise ValueError(f"nu requires 0 <= param < 1, got {param}")
        v = _nu_values(float(param), T)
    elif family == "mean_optimal":
        if param is None or not (0.0 < float(param) <= 1.0):
            raise ValueError(f"mean_optimal requires 0 < eta <= 1, got {param}")
        v = _nu_values(float(param), T)
    elif family == "fichtenberger":
        v = _nu_values(0.0, T)
    elif family == "anti_pgd":
        v[0] = 1.0
        if T > 1:
            v[1] = -1.0
    elif family == "anti_pgd_damped":
        nu = _check_open_unit("anti_pgd_damped", param)
        v[0] = 1.0
        if T > 1:
            v[1] = -(1.0 - nu)
    else:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    return CoeffSeq(v)


def limiting_bmagsq(family: str, param: float | None = None) -> Callable[[np.ndarray], np.ndarray]:
    """|B(omega)|^2 of the infinite-horizon sequence of a family.

    The nu family is the power series of sqrt(1 - (1-nu) z), so its squared
    modulus on the unit circle is |1 - nu - e^{i omega}|.
    """
    if family == "dpsgd":
        return lambda w: np.ones_like(np.asarray(w, dtype=float))
    if family in ("nu", "mean_optimal", "fichtenberger"):
        if family == "fichtenberger":
            r = 1.0
        else:
            make_coeffs(family, param, 1)  # range check
            r = 1.0 - float(param)
        return lambda w: np.sqrt(np.maximum(1.0 + r * r - 2.0 * r * np.cos(w), 0.0))
    if family in ("anti_pgd", "anti_pgd_damped"):
        r = 1.0 if family == "anti_pgd" else 1.0 - _check_open_unit(family, param)
        return lambda w: np.maximum(1.0 + r * r - 2.0 * r * np.cos(w), 0.0)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
