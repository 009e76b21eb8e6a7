"""Model self-checks shared by the ``selftest`` command and the test suite."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import fock_bsm, protocol, source
from .estimator import FluctuationParams, worst_case_bounds
from .reference_oracle import oracle_yield_error

ORACLE_GRID = tuple(
    dict(total_distance=dist, eta_C=eta_C, d_C=d_C, e_d=e_d)
    for dist, eta_C, d_C, e_d in itertools.product((0.0, 40.0), (0.4, 1.0), (0.0, 1e-3), (0.0, 0.03))
)
SANDWICH_GRID = tuple(itertools.product((0.0, 25.0, 50.0, 75.0), (0.1, 0.3, 0.6), (0.1, 0.3)))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def oracle_deviation(grid=ORACLE_GRID, max_photons=3):
    """Largest |dY| and |d(Y e)| between the Fock engine and the dense oracle."""
    dy = dye = 0.0
    for point in grid:
        params = fock_bsm.ChannelParams(**point)
        for basis in ("X", "Z"):
            table = fock_bsm.yield_table(basis, params)
            for j in range(max_photons + 1):
                for k in range(max_photons + 1):
                    y, ye = oracle_yield_error(j, k, basis, params)
                    dy = max(dy, abs(y - table.Y[j, k]))
                    dye = max(dye, abs(ye - table.errors[j, k]))
    return dy, dye


@dataclass(frozen=True)
class SandwichPoint:
    distance: float
    mu: float
    t: float
    y_min: float
    y_true: float
    e_max: float
    e_true: float
    H: float
    h_hi: float


def sandwich_points(grid=SANDWICH_GRID, N_t=1e9, eta_A=0.75, d_A=1e-6, channel=None):
    """Asymptotic worst-case bounds next to the model truth on a (distance, mu, t) grid."""
    channel = channel or fock_bsm.ChannelParams()
    fluct = FluctuationParams(method="none")
    out = []
    for distance, mu, t in grid:
        dists = source.heralded_distributions(source.SourceParams.symmetric(mu, t, eta_A, d_A))
        chan = fock_bsm.ChannelParams(
            total_distance=distance, loss_coeff=channel.loss_coeff, eta_C=channel.eta_C,
            d_C=channel.d_C, e_d=channel.e_d, accept=channel.accept,
        )
        yx, yz = fock_bsm.yield_table("X", chan), fock_bsm.yield_table("Z", chan)
        obs = protocol.exact_stats(dists, dists, yx, yz, N_t)
        truth = protocol.true_vacuum_terms(dists, dists, yx, yz)
        curve = worst_case_bounds(obs, dists, dists, fluct)
        out.append(SandwichPoint(
            distance=distance, mu=mu, t=t,
            y_min=float(curve.y11_z.min()), y_true=truth.Y11,
            e_max=float(curve.e11_ph.max()), e_true=truth.e11,
            H=truth.H, h_hi=float(curve.h[-1]),
        ))
    return out


def run_selftest():
    results = []
    dy, dye = oracle_deviation()
    results.append(CheckResult(
        "bsm_oracle_equivalence", dy <= 1e-10 and dye <= 1e-10,
        f"max|dY|={dy:.2e} max|d(Ye)|={dye:.2e} (tol 1e-10)",
    ))
    points = sandwich_points()
    bad = [p for p in points if not (p.y_min <= p.y_true and p.e_max >= p.e_true)]
    results.append(CheckResult(
        "estimator_sandwich", not bad, f"{len(points) - len(bad)}/{len(points)} grid points bracket the truth",
    ))
    outside = [p for p in points if not (0.0 <= p.H <= p.h_hi)]
    results.append(CheckResult(
        "vacuum_range_soundness", not outside, f"{len(points) - len(outside)}/{len(points)} contain the true H",
    ))
    return results


def as_rows(results):
    return [(r.name, "pass" if r.passed else "FAIL", r.detail) for r in results]


def max_abs(values):
    return float(np.max(np.abs(values))) if len(values) else 0.0
