"""Multistart simplex optimization of (mu, t) and sweeps over distance or data size.

The vacuum term h is never a free variable here: every evaluation already takes
the minimum over its admissible range.
"""
from __future__ import annotations

import functools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import source
from .key_rate import KeyRateResult, RateModel

logger = logging.getLogger(__name__)

THREADS_ENV = "PASSIVE_MDI_THREADS"


class InfeasibleError(RuntimeError):
    """Every multistart landed on infeasible points."""


@dataclass(frozen=True)
class OptimizationSpec:
    mu_bounds: tuple[float, float] = (0.01, 1.5)
    t_bounds: tuple[float, float] = (source.T_MIN, source.T_MAX)
    multistart: int = 5
    rtol: float = 1e-4
    max_evals: int = 400
    seed: int = 42

    def __post_init__(self):
        lo, hi = self.mu_bounds
        if not 0 < lo < hi:
            raise ValueError(f"invalid mu bounds {self.mu_bounds}")
        lo, hi = self.t_bounds
        if not 0 < lo < hi < 0.5:
            raise ValueError(f"t bounds must sit inside (0, 1/2), got {self.t_bounds}")
        if self.rtol <= 0:
            raise ValueError("rtol must be positive")
        if self.multistart < 1 or self.max_evals < 1:
            raise ValueError("multistart and max_evals must be positive")

    def to_box(self, u):
        (m0, m1), (t0, t1) = self.mu_bounds, self.t_bounds
        return m0 + u[0] * (m1 - m0), t0 + u[1] * (t1 - t0)

    def to_unit(self, mu, t):
        (m0, m1), (t0, t1) = self.mu_bounds, self.t_bounds
        return np.clip([(mu - m0) / (m1 - m0), (t - t0) / (t1 - t0)], 0.0, 1.0)

    def starts(self, warm=None):
        """Unit-square starting points: warm start first, then the four corners
        of the inner half-box and its center, then seeded random extras."""
        pts = [] if warm is None else [tuple(self.to_unit(*warm))]
        base = [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75), (0.5, 0.5)]
        pts += base[: self.multistart]
        extra = self.multistart - len(base)
        if extra > 0:
            rng = np.random.default_rng(self.seed)
            pts += [tuple(p) for p in rng.uniform(0.05, 0.95, size=(extra, 2))]
        return pts


@dataclass(frozen=True)
class PointResult:
    mu: float
    t: float
    R: float
    result: KeyRateResult | None
    n_evals: int


@dataclass(frozen=True)
class SweepRow:
    var: float
    mu: float
    t: float
    R: float
    Y11_ZL: float
    e11_phU: float
    H_min: float
    status: str


@dataclass
class SweepResult:
    variable: str
    rows: list[SweepRow] = field(default_factory=list)

    @property
    def values(self):
        return np.array([r.var for r in self.rows])

    @property
    def rates(self):
        return np.array([r.R for r in self.rows])


def default_workers():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _model_rate(model, distance, N_t, mu, t):
    return model.evaluate(mu, t, distance, N_t).raw


def _local_search(objective, spec, u0):
    """Bounded Nelder-Mead in the unit square; returns (u, value, n_evals)."""

    def value(u):
        mu, t = spec.to_box(u)
        return objective(mu, t)

    f0 = value(u0)
    scale = abs(f0) if math.isfinite(f0) and f0 != 0 else 1.0

    def loss(u):
        v = value(np.clip(u, 0.0, 1.0))
        return -v / scale if math.isfinite(v) else math.inf

    step = 0.1
    simplex = [np.asarray(u0, dtype=float)]
    for axis in range(2):
        p = simplex[0].copy()
        p[axis] += step if p[axis] + step <= 1.0 else -step
        simplex.append(p)
    with np.errstate(invalid="ignore"):  # inf - inf on fully infeasible simplices
        res = optimize.minimize(
            loss, simplex[0], method="Nelder-Mead", bounds=[(0.0, 1.0)] * 2,
            options={"initial_simplex": np.array(simplex), "xatol": 1e-6, "fatol": spec.rtol,
                     "maxfev": spec.max_evals},
        )
    best = -res.fun * scale if math.isfinite(res.fun) else -math.inf
    return tuple(np.clip(res.x, 0.0, 1.0)), best, int(res.nfev) + 1


def maximize(objective, spec, warm=None, workers=None):
    """Best ``(mu, t, value, n_evals)`` of ``objective(mu, t)`` over all starts.

    Starts are merged in order, so the result does not depend on ``workers``.
    """
    workers = default_workers() if workers is None else workers
    starts = spec.starts(warm)
    search = functools.partial(_local_search, objective, spec)
    if workers > 1 and len(starts) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(starts))) as pool:
            runs = list(pool.map(search, starts))
    else:
        runs = [search(u) for u in starts]
    n_evals = sum(r[2] for r in runs)
    best_u, best_v = None, -math.inf
    for u, v, _ in runs:
        if v > best_v:
            best_u, best_v = u, v
    if best_u is None:
        raise InfeasibleError("all multistart runs ended on infeasible points")
    mu, t = spec.to_box(best_u)
    return float(mu), float(t), best_v, n_evals


def optimize_point(distance, N_t, model=None, spec=None, warm=None, workers=None):
    """Maximize the key rate over (mu, t) at fixed distance and data size."""
    model = model or RateModel()
    spec = spec or OptimizationSpec()
    objective = functools.partial(_model_rate, model, distance, N_t)
    mu, t, _, n_evals = maximize(objective, spec, warm=warm, workers=workers)
    final = model.evaluate(mu, t, distance, N_t)
    return PointResult(mu=mu, t=t, R=final.R, result=final, n_evals=n_evals)


def sweep(variable, grid, model=None, spec=None, *, distance=50.0, N_t=1e9, workers=None):
    """Optimize every grid point, warm-starting from the previous optimum.

    ``variable`` is ``"distance"`` (km, at fixed ``N_t``) or ``"data_size"``
    (pulse pairs, at fixed ``distance``).
    """
    if variable not in ("distance", "data_size"):
        raise ValueError(f"unknown sweep variable {variable!r}")
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("empty sweep grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be strictly increasing")
    model = model or RateModel()
    spec = spec or OptimizationSpec()
    out = SweepResult(variable=variable)
    warm = None
    for g in grid:
        d, n = (g, N_t) if variable == "distance" else (distance, g)
        try:
            point = optimize_point(d, n, model, spec, warm=warm, workers=workers)
        except (InfeasibleError, ValueError) as exc:
            logger.warning("sweep point %s=%g failed: %s", variable, g, exc)
            out.rows.append(SweepRow(g, math.nan, math.nan, math.nan, math.nan, math.nan, math.nan,
                                     f"failed: {exc}"))
            continue
        res = point.result
        status = "ok" if not res.abort else f"abort: {res.reason}"
        out.rows.append(SweepRow(g, point.mu, point.t, point.R, res.Y11_ZL, res.e11_phU, res.h_min, status))
        warm = (point.mu, point.t)
        logger.info("%s=%g mu=%.4f t=%.4f R=%.4e", variable, g, point.mu, point.t, point.R)
    return out
