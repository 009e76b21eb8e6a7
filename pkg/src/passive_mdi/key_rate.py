"""Finite-key secret-key rate, worst case over the unobservable vacuum term."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import fock_bsm, protocol, source
from .estimator import GRID_SIZE_DEFAULT, FluctuationParams, RatioConditionError, worst_case_bounds


@dataclass(frozen=True)
class SecurityParams:
    eps_cor: float = 1e-7
    eps_prime: float = 1e-7
    eps_hat: float = 1e-7
    eps_PA: float = 1e-7
    f: float = 1.16

    def __post_init__(self):
        for name in ("eps_cor", "eps_prime", "eps_hat", "eps_PA"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.f < 1:
            raise ValueError(f"error-correction inefficiency f must be >= 1, got {self.f}")


@dataclass(frozen=True)
class KeyRateResult:
    R: float
    raw: float  # unclamped rate; negative when no key can be extracted
    h_min: float
    Y11_ZL: float
    e11_phU: float
    single_photon_term: float
    ec_leakage: float
    overhead: float
    abort: bool
    reason: str = ""


def binary_entropy(p):
    """Shannon binary entropy in bits, with 0 log 0 = 0. Works on arrays."""
    p = np.asarray(p, dtype=float)
    inside = (p > 0) & (p < 1)
    q = np.where(inside, p, 0.5)
    h = -q * np.log2(q) - (1 - q) * np.log2(1 - q)
    out = np.where(inside, h, 0.0)
    return float(out) if out.ndim == 0 else out


def finite_size_overhead(N_t, sec):
    """Composable-security penalty per pulse pair."""
    if N_t <= 0:
        raise ValueError("N_t must be positive")
    bits = (
        math.log2(8 / sec.eps_cor)
        + 2 * math.log2(2 / (sec.eps_prime * sec.eps_hat))
        + 2 * math.log2(1 / sec.eps_PA)
    )
    return bits / N_t


def _rate_terms(a1y, b1y, S_yy, E_yy, f):
    leak = S_yy * f * binary_entropy(E_yy)

    def rate(y11_z, e11_ph):
        return a1y * b1y * np.asarray(y11_z) * (1 - binary_entropy(e11_ph)) - leak

    return rate, leak


def key_rate(obs, curve, dists_A, dists_B, sec, N_t=None):
    """Minimum over the curve of the single-photon key term minus leakage, minus
    the finite-size overhead.  Only the y state is used for key."""
    if len(curve.h) == 0:
        raise ValueError("empty bound curve")
    N_t = obs.N_t if N_t is None else N_t
    a1y, b1y = float(dists_A.y[1]), float(dists_B.y[1])
    rate, leak = _rate_terms(a1y, b1y, obs.S_yy, obs.E_yy, sec.f)
    values = rate(curve.y11_z, curve.e11_ph)
    i = int(np.argmin(values))
    overhead = finite_size_overhead(N_t, sec)
    raw = float(values[i]) - overhead
    Y, e = float(curve.y11_z[i]), float(curve.e11_ph[i])
    reason = ""
    if np.all(curve.e11_ph >= 0.5):
        reason = "phase error bound reaches 0.5 over the whole range"
    elif raw <= 0:
        reason = "non-positive rate"
    return KeyRateResult(
        R=max(raw, 0.0) if not reason else 0.0,
        raw=raw,
        h_min=float(curve.h[i]),
        Y11_ZL=Y,
        e11_phU=e,
        single_photon_term=a1y * b1y * Y * (1 - binary_entropy(e)),
        ec_leakage=float(leak),
        overhead=overhead,
        abort=bool(reason),
        reason=reason,
    )


@dataclass(frozen=True)
class RateModel:
    """Everything held fixed while (mu, t, distance, N_t) vary.

    ``channel.total_distance`` is ignored; the distance is an argument of
    :meth:`evaluate`.  ``observation="sampled"`` replaces the expected gains by a
    seeded Poisson draw.
    """

    eta_A: float = 0.75
    d_A: float = 1e-6
    channel: fock_bsm.ChannelParams = field(default_factory=fock_bsm.ChannelParams)
    sec: SecurityParams = field(default_factory=SecurityParams)
    fluct: FluctuationParams = field(default_factory=FluctuationParams)
    grid_size: int = GRID_SIZE_DEFAULT
    n_cut_yield: int = fock_bsm.N_CUT_DEFAULT
    observation: str = "expected"
    seed: int = 42

    def channel_at(self, distance):
        return replace(self.channel, total_distance=float(distance))

    def source_params(self, mu, t):
        return source.SourceParams.symmetric(mu, t, eta_A=self.eta_A, d_A=self.d_A)

    def evaluate(self, mu, t, distance, N_t):
        """Full pipeline: source -> yields -> gains -> bounds over h -> rate."""
        src = self.source_params(mu, t)
        ok, bad_n = source.check_ratio_condition(src)
        if not ok:
            return _infeasible(f"ratio condition violated at n={bad_n}", self.sec, N_t)
        dists = source.heralded_distributions(src)
        chan = self.channel_at(distance)
        yx = fock_bsm.yield_table("X", chan, self.n_cut_yield)
        yz = fock_bsm.yield_table("Z", chan, self.n_cut_yield)
        exact = protocol.exact_stats(dists, dists, yx, yz, N_t)
        obs = protocol.observe(exact, N_t, mode=self.observation, seed=self.seed)
        a1y = float(dists.y[1])
        rate, _ = _rate_terms(a1y, a1y, obs.S_yy, obs.E_yy, self.sec.f)
        try:
            curve = worst_case_bounds(obs, dists, dists, self.fluct, grid_size=self.grid_size, rate=rate)
        except RatioConditionError as exc:
            return _infeasible(str(exc), self.sec, N_t)
        return key_rate(obs, curve, dists, dists, self.sec, N_t)


def evaluate(mu, t, distance, N_t, **model_kwargs):
    """Key rate at one operating point with the default device settings."""
    return RateModel(**model_kwargs).evaluate(mu, t, distance, N_t)


def _infeasible(reason, sec, N_t):
    overhead = finite_size_overhead(N_t, sec)
    return KeyRateResult(
        R=0.0, raw=-math.inf, h_min=math.nan, Y11_ZL=0.0, e11_phU=0.5,
        single_photon_term=0.0, ec_leakage=math.nan, overhead=overhead, abort=True, reason=reason,
    )
