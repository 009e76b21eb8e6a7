"""Single-photon-pair bounds from the passive decoy states.

The vacuum contribution ``H`` to the w-state gain is unobservable here, so the
bounds are functions of a trial value ``h`` that is scanned over the whole
admissible interval ``[0, 2 * upper(T_ww)]``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

GRID_SIZE_DEFAULT = 201


class RatioConditionError(ValueError):
    """The decoy combination has a non-positive denominator."""


@dataclass(frozen=True)
class FluctuationParams:
    """Gaussian deviation model; ``method="none"`` gives the asymptotic limit."""

    epsilon: float = 1e-7
    method: str = "gaussian"

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if self.method not in ("gaussian", "none"):
            raise ValueError(f"unknown fluctuation method {self.method!r}")

    @property
    def z(self):
        if self.method == "none":
            return 0.0
        return _normal_quantile(self.epsilon)


@functools.lru_cache(maxsize=32)
def _normal_quantile(epsilon):
    """z with P(N(0,1) > z) = epsilon."""
    return float(stats.norm.isf(epsilon))


def deviations(value, N_t, fluct):
    """Lower/upper confidence values for an observed gain.

    Standard error sqrt(value / N_t), floored at 1 / N_t so that a zero observation
    still gets a finite upper bound.
    """
    z = fluct.z
    spread = z * max(math.sqrt(max(value, 0.0) / N_t), 1.0 / N_t)
    return max(value - spread, 0.0) if value > 0 else 0.0, min(value + spread, 1.0)


@dataclass(frozen=True)
class BoundInputs:
    """Observed values with fluctuations applied, plus the source coefficients."""

    S_ww_lower: float
    S_xx_upper: float
    T_ww_upper: float
    a1w: float
    a1x: float
    b1w: float
    b2w: float
    b1x: float
    b2x: float

    @property
    def denominator(self):
        return self.a1w * self.a1x * (self.b1w * self.b2x - self.b1x * self.b2w)


def bound_inputs(obs, dists_A, dists_B, fluct):
    S_ww_lower, _ = deviations(obs.S_ww, obs.N_t, fluct)
    _, S_xx_upper = deviations(obs.S_xx, obs.N_t, fluct)
    _, T_ww_upper = deviations(obs.T_ww, obs.N_t, fluct)
    return BoundInputs(
        S_ww_lower=S_ww_lower,
        S_xx_upper=S_xx_upper,
        T_ww_upper=T_ww_upper,
        a1w=float(dists_A.w[1]),
        a1x=float(dists_A.x[1]),
        b1w=float(dists_B.w[1]),
        b2w=float(dists_B.w[2]),
        b1x=float(dists_B.x[1]),
        b2x=float(dists_B.x[2]),
    )


def y11_x_lower(inputs, h_tilde):
    """Lower bound on the X-basis single-photon-pair yield for trial vacuum term h."""
    den = inputs.denominator
    if not den > 0:
        raise RatioConditionError(f"non-positive decoy denominator {den:.3e}")
    num = (
        inputs.a1x * inputs.b2x * inputs.S_ww_lower
        - inputs.a1w * inputs.b2w * inputs.S_xx_upper
        - inputs.a1x * inputs.b2x * np.asarray(h_tilde, dtype=float)
    )
    return np.clip(num / den, 0.0, 1.0)


def e11_x_upper(inputs, h_tilde, y11_lower):
    """Upper bound on the single-photon-pair error rate; 0.5 where the yield bound is 0."""
    h = np.asarray(h_tilde, dtype=float)
    y = np.asarray(y11_lower, dtype=float)
    den = inputs.a1w * inputs.b1w * y
    num = inputs.T_ww_upper - 0.5 * h
    with np.errstate(divide="ignore", invalid="ignore"):
        e = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.5)
    return np.clip(e, 0.0, 0.5)


def h_range(obs_or_T_upper):
    """Admissible interval of the vacuum term: ``[0, 2 * upper(T_ww)]``."""
    T = getattr(obs_or_T_upper, "T_ww_upper", obs_or_T_upper)
    if T < 0:
        raise ValueError("error gain must be non-negative")
    return 0.0, 2.0 * float(T)


def cross_basis(y11_x, e11_x, n_X, n_Z, fluct):
    """Carry X-basis single-photon bounds over to the Z basis.

    ``n_X``, ``n_Z`` are the numbers of single-photon pairs sent in each basis;
    the yield deviation uses them directly, the error-rate deviation uses the
    detected pairs ``m = n * Y_Z_lower``.
    """
    y = np.asarray(y11_x, dtype=float)
    e = np.asarray(e11_x, dtype=float)
    if not (n_X > 0 and n_Z > 0):
        return np.zeros_like(y), np.full_like(e, 0.5)
    z = fluct.z
    y_z = np.maximum(0.0, y - z * np.sqrt(y * (1.0 / n_X + 1.0 / n_Z)))
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_m = np.where(y_z > 0, (1.0 / n_X + 1.0 / n_Z) / np.where(y_z > 0, y_z, 1.0), np.inf)
        spread = z * np.maximum(np.sqrt(e * (1.0 - e) * inv_m), inv_m)
        e_ph = np.where(np.isfinite(inv_m), np.minimum(0.5, e + spread), 0.5)
    return y_z, e_ph


@dataclass(frozen=True)
class BoundCurve:
    """Z-basis single-photon bounds over trial vacuum terms ``h``.

    Always contains both interval endpoints; a refined point may be appended,
    so ``h`` is sorted but not necessarily uniform.
    """

    h: np.ndarray
    y11_x: np.ndarray
    e11_x: np.ndarray
    y11_z: np.ndarray
    e11_ph: np.ndarray
    h_refined: float | None = None


def bounds_at(inputs, h, n_X, n_Z, fluct):
    y_x = y11_x_lower(inputs, h)
    e_x = e11_x_upper(inputs, h, y_x)
    y_z, e_ph = cross_basis(y_x, e_x, n_X, n_Z, fluct)
    return y_x, e_x, y_z, e_ph


def worst_case_bounds(obs, dists_A, dists_B, fluct, grid_size=GRID_SIZE_DEFAULT, rate=None):
    """Scan ``h`` over its admissible range.

    ``rate`` (optional) maps ``(y11_z, e11_ph)`` arrays to the objective whose
    minimum over ``h`` is wanted; the scan's best cell is then refined with a
    bounded scalar search and the refined point is added to the curve.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    inputs = bound_inputs(obs, dists_A, dists_B, fluct)
    lo, hi = h_range(inputs)
    n_X = obs.N_t * dists_A.w[1] * dists_B.w[1]
    n_Z = obs.N_t * dists_A.y[1] * dists_B.y[1]
    h = np.linspace(lo, hi, grid_size)
    y_x, e_x, y_z, e_ph = bounds_at(inputs, h, n_X, n_Z, fluct)
    h_ref = None
    if rate is not None and hi > lo:
        values = rate(y_z, e_ph)
        i = int(np.argmin(values))
        left, right = h[max(i - 1, 0)], h[min(i + 1, grid_size - 1)]

        def objective(x):
            return float(rate(*bounds_at(inputs, x, n_X, n_Z, fluct)[2:]))

        res = optimize.minimize_scalar(
            objective, bounds=(left, right), method="bounded", options={"xatol": 1e-6 * (hi - lo)}
        )
        if res.fun < values[i]:
            h_ref = float(res.x)
            pos = int(np.searchsorted(h, h_ref))
            extra = bounds_at(inputs, np.array([h_ref]), n_X, n_Z, fluct)
            h = np.insert(h, pos, h_ref)
            y_x, e_x, y_z, e_ph = (np.insert(arr, pos, v[0]) for arr, v in zip((y_x, e_x, y_z, e_ph), extra))
    return BoundCurve(h=h, y11_x=y_x, e11_x=e_x, y11_z=y_z, e11_ph=e_ph, h_refined=h_ref)
