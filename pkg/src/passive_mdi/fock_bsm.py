"""Linear-optics Bell-state measurement with Fock-state inputs.

Alice's j photons enter port ``a`` and Bob's k photons port ``b`` of a balanced
beam splitter (a -> (c+d)/sqrt2, b -> (c-d)/sqrt2).  Each output port ends in a
polarizing splitter, giving four threshold detectors ordered

    (D1H, D1V, D2H, D2V) = (c_H, c_V, d_H, d_V).

The relay announces a success for the coincidence patterns

    psi-  {D1H, D2V} or {D1V, D2H}
    psi+  {D1H, D1V} or {D2H, D2V}

with the other two detectors silent.  Channel loss is binomial thinning of each
input Fock state before interference; detector inefficiency and dark counts
enter through the threshold click model.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

N_CUT_DEFAULT = 10
N_MODES = 4

PSI_MINUS = ((1, 0, 0, 1), (0, 1, 1, 0))
PSI_PLUS = ((1, 1, 0, 0), (0, 0, 1, 1))
ACCEPTANCE_SETS = {"both": PSI_MINUS + PSI_PLUS, "psi_minus": PSI_MINUS}

# bit -> linear polarization angle
BASIS_ANGLES = {
    "Z": (0.0, math.pi / 2),  # H, V
    "X": (math.pi / 4, -math.pi / 4),  # +, -
}
BIT_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


def arm_transmittance(distance_km, loss_coeff=0.2):
    """Fiber transmittance ``10^(-loss_coeff * distance / 10)``."""
    if distance_km < 0 or loss_coeff < 0:
        raise ValueError("distance and loss coefficient must be non-negative")
    return 10.0 ** (-loss_coeff * distance_km / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    """Symmetric channel: Charlie sits midway, so each arm spans half the distance."""

    total_distance: float = 0.0
    loss_coeff: float = 0.2
    eta_C: float = 0.4
    d_C: float = 1e-7
    e_d: float = 0.015
    e_0: float = 0.5
    accept: str = "both"

    def __post_init__(self):
        if self.total_distance < 0 or self.loss_coeff < 0:
            raise ValueError("distance and loss coefficient must be non-negative")
        if not 0 < self.eta_C <= 1:
            raise ValueError(f"eta_C must lie in (0, 1], got {self.eta_C}")
        if not 0 <= self.d_C < 1:
            raise ValueError(f"d_C must lie in [0, 1), got {self.d_C}")
        if not 0 <= self.e_d < 0.5:
            raise ValueError(f"e_d must lie in [0, 0.5), got {self.e_d}")
        if self.e_0 != 0.5:
            raise ValueError("vacuum error rate e_0 is fixed at 0.5")
        if self.accept not in ACCEPTANCE_SETS:
            raise ValueError(f"accept must be one of {sorted(ACCEPTANCE_SETS)}")

    @property
    def eta_arm(self):
        return arm_transmittance(self.total_distance / 2.0, self.loss_coeff)

    @property
    def misalignment_angle(self):
        return math.asin(math.sqrt(self.e_d))


@dataclass(frozen=True)
class FockOutcomeDistribution:
    """Photon-number distribution over (D1H, D1V, D2H, D2V).

    ``outcomes`` has shape (K, 4); ``probs`` has shape (K,).
    """

    outcomes: np.ndarray
    probs: np.ndarray
    n_photons: int

    def as_dict(self):
        return {tuple(int(v) for v in o): float(p) for o, p in zip(self.outcomes, self.probs)}


@functools.lru_cache(maxsize=None)
def _compositions(n, parts=N_MODES):
    """All length-``parts`` tuples of non-negative ints summing to ``n``."""
    if parts == 1:
        return np.array([[n]], dtype=np.int64)
    rows = []
    for first in range(n, -1, -1):
        rest = _compositions(n - first, parts - 1)
        rows.append(np.column_stack([np.full(len(rest), first, dtype=np.int64), rest]))
    out = np.vstack(rows)
    out.setflags(write=False)
    return out


def _log_factorial(a):
    return special.gammaln(a + 1).sum(axis=1)


def _power_coefficients(n, modes):
    """Coefficients of ``(sum_m u_m o_m^dag)^n / sqrt(n!)`` over output monomials.

    Returns ``(exponents, coeff)`` where coeff excludes the sqrt(prod n_m!)
    normalization of the resulting Fock state.
    """
    comps = _compositions(n)
    log_fact = _log_factorial(comps)
    # n!/prod(c!) / sqrt(n!) = sqrt(n!) / prod(c!)
    scale = np.exp(0.5 * math.lgamma(n + 1) - log_fact)
    mono = np.prod(np.asarray(modes, dtype=complex)[None, :] ** comps, axis=1)
    return comps, scale * mono


def _input_modes(pol_A, pol_B):
    s = 1 / math.sqrt(2)
    ua = (s * math.cos(pol_A), s * math.sin(pol_A), s * math.cos(pol_A), s * math.sin(pol_A))
    ub = (s * math.cos(pol_B), s * math.sin(pol_B), -s * math.cos(pol_B), -s * math.sin(pol_B))
    return ua, ub


def fock_interference(j, k, pol_A, pol_B, max_photons=2 * N_CUT_DEFAULT):
    """Exact detector-mode photon statistics for |j, pol_A>_a |k, pol_B>_b."""
    if j < 0 or k < 0:
        raise ValueError("photon numbers must be non-negative")
    if j + k > max_photons:
        raise ValueError(f"j + k = {j + k} exceeds expansion limit {max_photons}")
    total = j + k
    ua, ub = _input_modes(pol_A, pol_B)
    ca, amp_a = _power_coefficients(j, ua)
    cb, amp_b = _power_coefficients(k, ub)
    base = total + 1
    weights = base ** np.arange(N_MODES - 1, -1, -1)
    idx = (ca @ weights)[:, None] + (cb @ weights)[None, :]
    coeff = (amp_a[:, None] * amp_b[None, :]).ravel()
    size = base**N_MODES
    acc = np.bincount(idx.ravel(), weights=coeff.real, minlength=size) + 1j * np.bincount(
        idx.ravel(), weights=coeff.imag, minlength=size
    )
    outcomes = _compositions(total)
    amp = acc[outcomes @ weights]
    probs = np.abs(amp) ** 2 * np.exp(_log_factorial(outcomes))
    keep = probs > 0
    return FockOutcomeDistribution(outcomes[keep], probs[keep], total)


def _click_probability(n, eta_C, d_C):
    # dark count, or else a photon detected; exactly d_C when n = 0
    return d_C + (1.0 - d_C) * (1.0 - (1.0 - eta_C) ** n)


def click_pattern_probs(dist, eta_C, d_C):
    """Distribution over the 16 click patterns of four independent threshold detectors."""
    click = _click_probability(dist.outcomes, eta_C, d_C)  # (K, 4)
    result = {}
    for pattern in np.ndindex(2, 2, 2, 2):
        mask = np.array(pattern, dtype=bool)
        per_mode = np.where(mask[None, :], click, 1.0 - click)
        result[pattern] = float(dist.probs @ np.prod(per_mode, axis=1))
    return result


def _pattern_probability(dist, pattern, eta_C, d_C):
    click = _click_probability(dist.outcomes, eta_C, d_C)
    per_mode = np.where(np.array(pattern, dtype=bool)[None, :], click, 1.0 - click)
    return float(dist.probs @ np.prod(per_mode, axis=1))


def is_error(basis, bits, pattern):
    """Whether an accepted ``pattern`` with bit pair ``bits`` is a bit error.

    Z basis: Bob always flips, so equal bits are wrong.  X basis: psi- means
    opposite bits, psi+ means equal bits.
    """
    equal = bits[0] == bits[1]
    if basis == "Z":
        return equal
    if pattern in PSI_MINUS:
        return equal
    return not equal


def _polarizations(basis, bits, misalignment):
    angles = BASIS_ANGLES[basis]
    return angles[bits[0]], angles[bits[1]] + misalignment


@dataclass(frozen=True)
class YieldTable:
    """``Y[j, k]`` and ``e[j, k]`` for 0 <= j, k <= n_cut in one basis.

    Entries beyond ``n_cut`` are not modeled; callers bound their contribution
    by the source tail mass (every yield is at most 1).
    """

    basis: str
    Y: np.ndarray
    e: np.ndarray
    n_cut: int

    @property
    def errors(self):
        """``Y * e``, the accepted-and-wrong probability."""
        return self.Y * self.e


@functools.lru_cache(maxsize=64)
def _acceptance_matrices(basis, n_cut, eta_C, d_C, e_d, accept):
    """Bit-averaged accept / accept-and-wrong probabilities for surviving photon
    numbers (i, m), before channel loss."""
    patterns = ACCEPTANCE_SETS[accept]
    delta = math.asin(math.sqrt(e_d))
    acc = np.zeros((n_cut + 1, n_cut + 1))
    err = np.zeros((n_cut + 1, n_cut + 1))
    for bits in BIT_PAIRS:
        pol_A, pol_B = _polarizations(basis, bits, delta)
        for i in range(n_cut + 1):
            for m in range(n_cut + 1):
                dist = fock_interference(i, m, pol_A, pol_B, max_photons=2 * n_cut)
                for pattern in patterns:
                    p = _pattern_probability(dist, pattern, eta_C, d_C)
                    acc[i, m] += p
                    if is_error(basis, bits, pattern):
                        err[i, m] += p
    acc /= len(BIT_PAIRS)
    err /= len(BIT_PAIRS)
    acc.setflags(write=False)
    err.setflags(write=False)
    return acc, err


def _thinning_matrix(n_cut, eta):
    """``B[j, i]`` = P(i of j photons survive)."""
    j = np.arange(n_cut + 1)[:, None]
    i = np.arange(n_cut + 1)[None, :]
    return np.where(i <= j, stats.binom.pmf(i, j, eta), 0.0)


@functools.lru_cache(maxsize=256)
def yield_table(basis, params, n_cut=N_CUT_DEFAULT):
    """Full yield/error table for one basis under ``params``."""
    if basis not in BASIS_ANGLES:
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    acc, err = _acceptance_matrices(basis, n_cut, params.eta_C, params.d_C, params.e_d, params.accept)
    B = _thinning_matrix(n_cut, params.eta_arm)
    Y = B @ acc @ B.T
    YE = B @ err @ B.T
    with np.errstate(invalid="ignore", divide="ignore"):
        e = np.where(Y > 0, YE / Y, params.e_0)
    Y = np.clip(Y, 0.0, 1.0)
    e = np.clip(e, 0.0, 1.0)
    Y.setflags(write=False)
    e.setflags(write=False)
    return YieldTable(basis=basis, Y=Y, e=e, n_cut=n_cut)


def yield_error(j, k, basis, params, n_cut=N_CUT_DEFAULT):
    """``(Y_jk, e_jk)`` for Alice sending j and Bob sending k photons."""
    if not (0 <= j <= n_cut and 0 <= k <= n_cut):
        raise ValueError(f"(j, k) = ({j}, {k}) outside truncation n_cut = {n_cut}")
    table = yield_table(basis, params, n_cut)
    return float(table.Y[j, k]), float(table.e[j, k])
