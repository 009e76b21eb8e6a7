"""Observable gains and error counts of the passive protocol."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .source import STATE_BASIS


@dataclass(frozen=True)
class Gain:
    """S_lr, T_lr, E_lr for one state pair, with the truncation bound on S."""

    S: float
    T: float
    E: float
    tail: float


@dataclass(frozen=True)
class ObservedStats:
    """Gains as seen by Alice and Bob after ``N_t`` pulse pairs.

    In expected mode the values equal the model gains; in sampled mode they are
    empirical frequencies ``count / N_t``.
    """

    S_ww: float
    S_xx: float
    T_ww: float
    S_yy: float
    T_yy: float
    N_t: float
    mode: str = "expected"

    @property
    def E_ww(self):
        return self.T_ww / self.S_ww if self.S_ww > 0 else 0.5

    @property
    def E_yy(self):
        return self.T_yy / self.S_yy if self.S_yy > 0 else 0.5

    @property
    def counts(self):
        """Effective detection counts per observable."""
        return {
            name: getattr(self, name) * self.N_t
            for name in ("S_ww", "S_xx", "T_ww", "S_yy", "T_yy")
        }


@dataclass(frozen=True)
class AsymptoticTruth:
    """Model quantities the estimator never sees, for checking its bounds."""

    Y11: float  # Z basis
    e11: float  # X basis single-photon error, i.e. the phase error
    Y11_X: float
    H: float
    H_prime: float


def gains(l, r, dists_A, dists_B, yields):
    """Gain ``S_lr`` and error ``T_lr`` when Alice heralds state l and Bob state r."""
    basis = STATE_BASIS[l]
    if STATE_BASIS[r] != basis:
        raise ValueError(f"states {l!r} and {r!r} are prepared in different bases")
    if yields.basis != basis:
        raise ValueError(f"yield table is for basis {yields.basis}, states need {basis}")
    n = yields.n_cut
    a_full, b_full = dists_A[l], dists_B[r]
    a, b = a_full[: n + 1], b_full[: n + 1]
    if len(a) < n + 1:
        a = np.pad(a, (0, n + 1 - len(a)))
    if len(b) < n + 1:
        b = np.pad(b, (0, n + 1 - len(b)))
    S = float(a @ yields.Y @ b)
    T = float(a @ yields.errors @ b)
    if S == 0.0 and T > 0.0:
        raise ValueError("error gain positive while gain is zero")
    # mass of (j, k) pairs outside the table, including the source's own truncation
    out_a = a_full[n + 1:].sum() + dists_A.tail
    out_b = b_full[n + 1:].sum() + dists_B.tail
    tail = float(out_a * (b.sum() + out_b) + a.sum() * out_b)
    E = T / S if S > 0 else 0.5
    return Gain(S=S, T=T, E=E, tail=max(tail, 0.0))


def exact_stats(dists_A, dists_B, yields_X, yields_Z, N_t):
    """Expected-value observations for the three state pairs the protocol uses."""
    ww = gains("w", "w", dists_A, dists_B, yields_X)
    xx = gains("x", "x", dists_A, dists_B, yields_X)
    yy = gains("y", "y", dists_A, dists_B, yields_Z)
    return ObservedStats(S_ww=ww.S, S_xx=xx.S, T_ww=ww.T, S_yy=yy.S, T_yy=yy.T, N_t=N_t)


def _vacuum_term(a, b, Y):
    n = min(len(a), len(b), Y.shape[0])
    a, b, Y = a[:n], b[:n], Y[:n, :n]
    return float(a[0] * b[0] * Y[0, 0] + a[0] * (b[1:] @ Y[0, 1:]) + b[0] * (a[1:] @ Y[1:, 0]))


def true_vacuum_terms(dists_A, dists_B, yields_X, yields_Z):
    """Vacuum-related combinations for w (``H``) and x (``H_prime``), plus the
    single-photon-pair truth."""
    return AsymptoticTruth(
        Y11=float(yields_Z.Y[1, 1]),
        e11=float(yields_X.e[1, 1]),
        Y11_X=float(yields_X.Y[1, 1]),
        H=_vacuum_term(dists_A.w, dists_B.w, yields_X.Y),
        H_prime=_vacuum_term(dists_A.x, dists_B.x, yields_X.Y),
    )


def observe(stats, N_t, mode="expected", seed=None):
    """Turn exact gains into observations over ``N_t`` pulse pairs.

    ``sampled`` draws Poisson detection counts and binomial error counts among
    them, so ``T <= S`` holds per sample.
    """
    if N_t <= 0:
        raise ValueError("N_t must be positive")
    if mode == "expected":
        return replace(stats, N_t=N_t, mode="expected")
    if mode != "sampled":
        raise ValueError(f"unknown observation mode {mode!r}")
    rng = np.random.default_rng(seed)
    values = {}
    for s_name, t_name in (("S_ww", "T_ww"), ("S_xx", None), ("S_yy", "T_yy")):
        s = getattr(stats, s_name)
        count = rng.poisson(s * N_t)
        if count == 0:
            raise ValueError(f"zero effective counts for {s_name}")
        values[s_name] = count / N_t
        if t_name is not None:
            e = getattr(stats, t_name) / s if s > 0 else 0.5
            values[t_name] = rng.binomial(count, e) / N_t
    return ObservedStats(N_t=N_t, mode="sampled", **values)
