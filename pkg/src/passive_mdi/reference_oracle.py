"""Dense state-vector reference for the relay measurement.

Validation only.  Shares no expansion code with :mod:`passive_mdi.fock_bsm`:
states live in an explicit truncated Fock basis over the input modes
(a_H, a_V, b_H, b_V), mode transformations are matrix exponentials of
quadratic generators, and every loss (fiber and detector) is a beam splitter
coupling to a vacuum ancilla that is traced out.
"""
from __future__ import annotations

import functools
import itertools
import math

import numpy as np
from scipy.linalg import expm

N_MAX_DEFAULT = 6
_MODES = 4
_A_H, _A_V, _B_H, _B_V = range(_MODES)

_PSI_M = {(1, 0, 0, 1), (0, 1, 1, 0)}
_PSI_P = {(1, 1, 0, 0), (0, 0, 1, 1)}


@functools.lru_cache(maxsize=None)
def _basis(n_modes, n_max):
    states = [s for s in itertools.product(range(n_max + 1), repeat=n_modes) if sum(s) <= n_max]
    return tuple(states), {s: i for i, s in enumerate(states)}


@functools.lru_cache(maxsize=None)
def _lowering(n_modes, n_max, mode):
    """Annihilation operator matrix for ``mode`` on the truncated space."""
    states, index = _basis(n_modes, n_max)
    op = np.zeros((len(states), len(states)))
    for col, s in enumerate(states):
        if s[mode]:
            lowered = list(s)
            lowered[mode] -= 1
            op[index[tuple(lowered)], col] = math.sqrt(s[mode])
    return op


@functools.lru_cache(maxsize=None)
def _rotation(n_modes, n_max, m1, m2, theta):
    """Unitary sending m1^dag -> cos(theta) m1^dag + sin(theta) m2^dag."""
    a = _lowering(n_modes, n_max, m1)
    b = _lowering(n_modes, n_max, m2)
    gen = theta * (b.T @ a - a.T @ b)
    return expm(gen)


def _phase_flip(n_modes, n_max, mode):
    """exp(i*pi*n_mode): flips the sign of the mode's creation operator."""
    states, _ = _basis(n_modes, n_max)
    return np.diag([(-1.0) ** s[mode] for s in states])


@functools.lru_cache(maxsize=None)
def _relay_unitary(n_max):
    """50:50 beam splitter acting on both polarizations.

    a^dag -> (a^dag + b^dag)/sqrt2 and b^dag -> (a^dag - b^dag)/sqrt2, after which
    the a (b) modes are read as the c (d) output ports.
    """
    u = np.eye(len(_basis(_MODES, n_max)[0]))
    for pa, pb in ((_A_H, _B_H), (_A_V, _B_V)):
        u = _rotation(_MODES, n_max, pa, pb, math.pi / 4) @ _phase_flip(_MODES, n_max, pb) @ u
    return u


@functools.lru_cache(maxsize=None)
def _loss_distribution(n, eta):
    """Surviving-photon distribution of |n> through a beam splitter of
    transmittance ``eta`` whose other input is vacuum."""
    theta = math.acos(math.sqrt(eta))
    states, index = _basis(2, n)
    psi = np.zeros(len(states))
    psi[index[(n, 0)]] = 1.0
    psi = _rotation(2, n, 0, 1, theta) @ psi
    out = np.zeros(n + 1)
    for s, amp in zip(states, psi):
        if sum(s) == n:
            out[s[0]] += amp**2
    return out


def dense_state(j, k, pol_A, pol_B, n_max=N_MAX_DEFAULT):
    """Post-relay state vector for |j>_a |k>_b with the given linear polarizations."""
    if j + k > n_max:
        raise ValueError(f"j + k = {j + k} exceeds truncation n_max = {n_max}")
    states, index = _basis(_MODES, n_max)
    psi = np.zeros(len(states))
    start = [0] * _MODES
    start[_A_H], start[_B_H] = j, k
    psi[index[tuple(start)]] = 1.0
    psi = _rotation(_MODES, n_max, _A_H, _A_V, pol_A) @ psi
    psi = _rotation(_MODES, n_max, _B_H, _B_V, pol_B) @ psi
    # polarizing splitters are a relabeling: (a_H, a_V, b_H, b_V) -> (D1H, D1V, D2H, D2V)
    return _relay_unitary(n_max) @ psi


@functools.lru_cache(maxsize=None)
def _photon_distribution(i, m, pol_A, pol_B, n_max):
    states, _ = _basis(_MODES, n_max)
    psi = dense_state(i, m, pol_A, pol_B, n_max)
    return tuple((s, amp**2) for s, amp in zip(states, psi) if amp != 0.0)


@functools.lru_cache(maxsize=None)
def _detector_click_probs(counts, eta_C, d_C):
    """Click probability per mode given photon counts arriving at the detectors."""
    probs = []
    for n in counts:
        survive = _loss_distribution(n, eta_C) if n else np.array([1.0])
        probs.append(d_C + (1.0 - d_C) * (1.0 - survive[0]))
    return probs


def _bits_to_angles(basis, bits, misalignment):
    if basis == "Z":
        angles = (0.0, math.pi / 2)
    elif basis == "X":
        angles = (math.pi / 4, 3 * math.pi / 4)  # 3pi/4 and -pi/4 differ by a global sign
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return angles[bits[0]], angles[bits[1]] + misalignment


def dense_simulate(j, k, basis, bits, params, n_max=N_MAX_DEFAULT):
    """Click-pattern distribution (16 patterns) for one bit pair, with fiber loss."""
    pol_A, pol_B = _bits_to_angles(basis, bits, math.asin(math.sqrt(params.e_d)))
    eta = params.eta_arm
    loss_a = _loss_distribution(j, eta) if j else np.array([1.0])
    loss_b = _loss_distribution(k, eta) if k else np.array([1.0])
    patterns = {p: 0.0 for p in itertools.product((0, 1), repeat=_MODES)}
    for i, pa in enumerate(loss_a):
        for m, pb in enumerate(loss_b):
            weight = pa * pb
            if weight == 0.0:
                continue
            for s, prob in _photon_distribution(i, m, pol_A, pol_B, n_max):
                p_state = weight * prob
                clicks = _detector_click_probs(s, params.eta_C, params.d_C)
                for pattern in patterns:
                    p = p_state
                    for c, q in zip(pattern, clicks):
                        p *= q if c else 1.0 - q
                    patterns[pattern] += p
    return patterns


def oracle_yield_error(j, k, basis, params, n_max=N_MAX_DEFAULT):
    """``(Y_jk, Y_jk * e_jk)`` by averaging dense simulations over the bit pairs."""
    accepted = _PSI_M | _PSI_P if params.accept == "both" else _PSI_M
    y = ye = 0.0
    for bits in ((0, 0), (0, 1), (1, 0), (1, 1)):
        dist = dense_simulate(j, k, basis, bits, params, n_max)
        same = bits[0] == bits[1]
        for pattern in accepted:
            p = dist[pattern] / 4.0
            y += p
            if basis == "Z":
                wrong = same
            else:
                wrong = same if pattern in _PSI_M else not same
            if wrong:
                ye += p
    return y, ye
