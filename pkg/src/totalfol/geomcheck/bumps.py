"""Smooth cutoff functions used by the model foliations (vectorized)."""

from __future__ import annotations

import numpy as np

__all__ = [
    "eta",
    "smooth_step",
    "smooth_step_slope",
    "bump",
    "chi_bar_1",
    "chi_1",
    "chi_R",
    "chi_3",
    "chi_3_slope",
    "shear_ramp",
    "shear_ramp_slope",
    "alpha_shear",
    "BumpSpec",
]


def eta(n: int) -> float:
    return 1.0 / (100 * n)


def _f(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def _fprime(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1.0 / u[pos]) / u[pos] ** 2
    return out


def smooth_step(u):
    """0 for u <= 0, 1 for u >= 1, smooth and increasing in between."""
    a, b = _f(u), _f(1.0 - np.asarray(u, dtype=float))
    return a / (a + b)


def smooth_step_slope(u):
    u = np.asarray(u, dtype=float)
    a, b = _f(u), _f(1.0 - u)
    da, db = _fprime(u), -_fprime(1.0 - u)
    return (da * b - a * db) / (a + b) ** 2


def bump(x, lo: float, hi: float, peak: float):
    """Positive exactly on (lo, hi), maximum ``peak`` at the midpoint."""
    x = np.asarray(x, dtype=float)
    s = (2.0 * x - lo - hi) / (hi - lo)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = peak * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def chi_bar_1(x, n: int):
    return bump(x, 1.0 / (16 * n), 1.0 / (8 * n), eta(n) / 2)


def _offset_from_lattice(y, n: int):
    """Signed distance from y to the nearest q_j = j/n, in [-1/2n, 1/2n)."""
    y = np.asarray(y, dtype=float)
    return (np.mod(y * n + 0.5, 1.0) - 0.5) / n


def chi_1(y, n: int):
    """Odd about every q_j; vanishes near the lattice points and near their midpoints."""
    u = _offset_from_lattice(y, n)
    half = 1.0 / (2 * n)
    return chi_bar_1(half + u, n) - chi_bar_1(half - u, n)


def chi_R(x):
    """Odd profile of the Reeb forms, in (0, 1) exactly on (1/2, 3/2)."""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * bump(np.abs(x), 0.5, 1.5, 0.5)


def _band(n: int) -> tuple[float, float]:
    return 1.0 - 9.0 / (16 * n), 1.0 - 7.0 / (16 * n)


def chi_3(x, n: int):
    """Lift on [0, 1) of a degree-one circle map: 0 before the band, 1 after it."""
    lo, hi = _band(n)
    xt = np.mod(np.asarray(x, dtype=float), 1.0)
    return smooth_step((xt - lo) / (hi - lo))


def chi_3_slope(x, n: int):
    lo, hi = _band(n)
    xt = np.mod(np.asarray(x, dtype=float), 1.0)
    return smooth_step_slope((xt - lo) / (hi - lo)) / (hi - lo)


def shear_ramp(t):
    """0 up to t = 3/4, 1 from t = 7/8 on."""
    return smooth_step((np.asarray(t, dtype=float) - 0.75) * 8.0)


def shear_ramp_slope(t):
    return 8.0 * smooth_step_slope((np.asarray(t, dtype=float) - 0.75) * 8.0)


def alpha_shear(x, t, n: int):
    """Correction term turning the band shear into the linear map A1 for t >= 7/8."""
    xt = np.mod(np.asarray(x, dtype=float), 1.0)
    return shear_ramp(t) * (xt - chi_3(xt, n))


class BumpSpec:
    """Named access to the cutoffs, mostly for reports and tests."""

    KINDS = ("chi_bar_1", "chi_1", "chi_R", "chi_3", "alpha_shear")

    def __init__(self, kind: str, n: int = 1):
        if kind not in self.KINDS:
            raise ValueError(f"unknown bump kind {kind!r}")
        self.kind = kind
        self.n = n
        self.eta = eta(n)

    def __call__(self, x, t=None):
        if self.kind == "chi_bar_1":
            return chi_bar_1(x, self.n)
        if self.kind == "chi_1":
            return chi_1(x, self.n)
        if self.kind == "chi_R":
            return chi_R(x)
        if self.kind == "chi_3":
            return chi_3(x, self.n)
        return alpha_shear(x, 0.0 if t is None else t, self.n)
