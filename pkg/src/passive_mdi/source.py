"""Photon-number statistics of the heralded (passive decoy) source.

A PDC pulse pair is split into an idler and a signal mode.  The idler passes a
beam splitter of transmittance ``t`` and hits two threshold detectors D1, D2.
The four local outcomes

    V1  no click            -> state w  (X basis)
    V2  click at D1 only    -> state x  (X basis)
    V3  click at D2 only    -> state y  (Z basis)
    V4  both click          -> state z  (Z basis)

condition the signal mode into four photon-number mixtures ``P_n^l``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

EVENTS = ("V1", "V2", "V3", "V4")
STATES = ("w", "x", "y", "z")
EVENT_TO_STATE = dict(zip(EVENTS, STATES))
STATE_TO_EVENT = dict(zip(STATES, EVENTS))
STATE_BASIS = {"w": "X", "x": "X", "y": "Z", "z": "Z"}

T_MIN = 0.01
T_MAX = 0.4999
N_CUT_MIN = 10
N_CUT_MAX = 40


@dataclass(frozen=True)
class SourceParams:
    """Heralded-source knobs; ``t`` is the local splitter transmittance toward D1."""

    mu: float
    t: float
    eta_1: float = 0.75
    eta_2: float = 0.75
    d_1: float = 1e-6
    d_2: float = 1e-6

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not 0 < self.t < 0.5:
            raise ValueError(f"t must lie in (0, 1/2), got {self.t}")
        for name in ("eta_1", "eta_2"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("d_1", "d_2"):
            v = getattr(self, name)
            if not 0 <= v < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")

    @classmethod
    def symmetric(cls, mu, t, eta_A=0.75, d_A=1e-6):
        return cls(mu=mu, t=t, eta_1=eta_A, eta_2=eta_A, d_1=d_A, d_2=d_A)

    @property
    def is_symmetric(self):
        return self.eta_1 == self.eta_2 and self.d_1 == self.d_2


def default_n_cut(mu):
    """Truncation keeping the Poisson tail far below 1e-12."""
    return min(N_CUT_MAX, max(N_CUT_MIN, math.ceil(mu + 12 * math.sqrt(mu) + 20)))


def poisson_pn(mu, n):
    return math.exp(n * math.log(mu) - mu - math.lgamma(n + 1)) if n else math.exp(-mu)


def p_split_given_n(n, s1, s2, params):
    """Probability that ``s1`` photons are detected behind branch 1 and ``s2`` behind
    branch 2 when ``n`` photons hit the local splitter.

    Branch 1 receives each photon with probability ``t`` and detects it with
    ``eta_1``; branch 2 gets the rest and detects with ``eta_2``.
    """
    if min(n, s1, s2) < 0 or s1 + s2 > n:
        raise ValueError(f"invalid split (n={n}, s1={s1}, s2={s2})")
    t, e1, e2 = params.t, params.eta_1, params.eta_2
    total = 0.0
    for k in range(s1, n - s2 + 1):
        route = math.comb(n, k) * t**k * (1 - t) ** (n - k)
        det1 = math.comb(k, s1) * e1**s1 * (1 - e1) ** (k - s1)
        det2 = math.comb(n - k, s2) * e2**s2 * (1 - e2) ** (n - k - s2)
        total += route * det1 * det2
    return total


def p_event_given_split(event, s1, s2, params):
    """Local-event probability given detected photon numbers (threshold detectors)."""
    d1, d2 = params.d_1, params.d_2
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}")
    i = EVENTS.index(event)
    if s1 == 0 and s2 == 0:
        row = ((1 - d1) * (1 - d2), d1 * (1 - d2), d2 * (1 - d1), d1 * d2)
    elif s2 == 0:
        row = (0.0, 1 - d2, 0.0, d2)
    elif s1 == 0:
        row = (0.0, 0.0, 1 - d1, d1)
    else:
        row = (0.0, 0.0, 0.0, 1.0)
    return row[i]


def _binom_pmf(n, p):
    k = np.arange(n + 1)
    return special.comb(n, k) * p**k * (1 - p) ** (n - k)


def split_matrix(n, params):
    """``M[s1, s2] = p_split_given_n(n, s1, s2)`` for all splits at once."""
    return _split_matrix(n, params.t, params.eta_1, params.eta_2)


@functools.lru_cache(maxsize=1024)
def _split_matrix(n, t, e1, e2):
    route = _binom_pmf(n, t)
    M = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        M[: k + 1, : n - k + 1] += route[k] * np.outer(_binom_pmf(k, e1), _binom_pmf(n - k, e2))
    M.setflags(write=False)
    return M


def _event_table(event, n, params):
    """``p_event_given_split`` over all (s1, s2); only zero / non-zero matters."""
    table = np.full((n + 1, n + 1), p_event_given_split(event, 1, 1, params))
    table[1:, 0] = p_event_given_split(event, 1, 0, params)
    table[0, 1:] = p_event_given_split(event, 0, 1, params)
    table[0, 0] = p_event_given_split(event, 0, 0, params)
    return table


def heralded_pn(event, n, params):
    """Joint probability of local event ``event`` and ``n`` photons in the signal mode,
    summed over every detected split (s1, s2)."""
    if event not in EVENTS:
        raise ValueError(f"unknown event {event!r}")
    M = split_matrix(n, params)
    return poisson_pn(params.mu, n) * float(np.sum(_event_table(event, n, params) * M))


def heralded_pn_closed(state, n, params):
    """Closed form for identical local detectors (eta_1 = eta_2, d_1 = d_2)."""
    if not params.is_symmetric:
        raise ValueError("closed form requires eta_1 == eta_2 and d_1 == d_2")
    mu, t, eta, d = params.mu, params.t, params.eta_1, params.d_1
    pn = poisson_pn(mu, n)
    # (1-eta)^n [(q/(1-eta))^n + d - 1] expanded so that eta = 1 stays finite
    w = (1 - d) ** 2 * (1 - eta) ** n * pn
    x = (1 - d) * ((1 - (1 - t) * eta) ** n + (d - 1) * (1 - eta) ** n) * pn
    y = (1 - d) * ((1 - t * eta) ** n + (d - 1) * (1 - eta) ** n) * pn
    if state == "w":
        return w
    if state == "x":
        return x
    if state == "y":
        return y
    if state == "z":
        return pn - w - x - y
    raise ValueError(f"unknown state {state!r}")


@dataclass(frozen=True)
class HeraldedDistributions:
    """Truncated ``P_n^l`` for n = 0..n_cut, one array per state."""

    w: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    poisson: np.ndarray
    n_cut: int
    tail: float
    params: SourceParams = field(repr=False)

    def __getitem__(self, state):
        if state not in STATES:
            raise KeyError(state)
        return getattr(self, state)

    def event_probability(self, state):
        """Probability that the local event heralding ``state`` occurs (truncated)."""
        return float(self[state].sum())


def heralded_distributions(params, n_cut=None):
    """All four heralded distributions, vectorized over n.

    Only whether each branch saw zero photons matters to the event table, so the
    split sums collapse to powers of the per-photon miss probabilities.
    """
    if n_cut is None:
        n_cut = default_n_cut(params.mu)
    n = np.arange(n_cut + 1)
    pn = stats.poisson.pmf(n, params.mu)
    t, e1, e2, d1, d2 = params.t, params.eta_1, params.eta_2, params.d_1, params.d_2
    q00 = (1 - t * e1 - (1 - t) * e2) ** n
    q1_zero = (1 - t * e1) ** n  # nothing detected in branch 1
    q2_zero = (1 - (1 - t) * e2) ** n  # nothing detected in branch 2
    only1 = q2_zero - q00  # s1 > 0, s2 = 0
    only2 = q1_zero - q00  # s1 = 0, s2 > 0
    both = 1 - q1_zero - q2_zero + q00
    w = (1 - d1) * (1 - d2) * q00
    x = d1 * (1 - d2) * q00 + (1 - d2) * only1
    y = d2 * (1 - d1) * q00 + (1 - d1) * only2
    z = d1 * d2 * q00 + d2 * only1 + d1 * only2 + both
    tail = float(stats.poisson.sf(n_cut, params.mu))
    return HeraldedDistributions(
        w=pn * w, x=pn * x, y=pn * y, z=pn * z,
        poisson=pn, n_cut=n_cut, tail=tail, params=params,
    )


def check_ratio_condition(params, n_max=10):
    """Check that ``P_n^x / P_n^w`` grows with n (strictly from n=1 to n=2).

    This is what keeps the single-photon lower bound's denominator positive and
    the dropped multi-photon terms non-positive.  Returns ``(ok, first_bad_n)``
    with ``first_bad_n`` None when the condition holds up to ``n_max``.
    """
    if not params.is_symmetric:
        raise ValueError("ratio condition is defined for symmetric local detectors")
    t, eta, d = params.t, params.eta_1, params.d_1
    if eta >= 1:
        return False, 1  # w-state carries no photons
    growth = (1 - (1 - t) * eta) / (1 - eta)
    n = np.arange(1, n_max + 1)
    ratio = (growth**n + d - 1) / (1 - d)
    if not ratio[1] - ratio[0] > 1e-12 * abs(ratio[0]):
        return False, 2
    for i in range(2, len(ratio)):
        if ratio[i] < ratio[1] or ratio[i] < ratio[i - 1] * (1 - 1e-12):
            return False, int(n[i])
    return True, None
