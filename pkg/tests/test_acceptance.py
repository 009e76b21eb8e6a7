"""One verdict per primary acceptance criterion, printed in the pytest summary."""
import itertools
import time

import numpy as np
import pytest
from scipy import stats

from passive_mdi import checks, fock_bsm, protocol, source
from passive_mdi.estimator import FluctuationParams, bound_inputs, e11_x_upper, y11_x_lower
from passive_mdi.fock_bsm import ChannelParams, YieldTable
from passive_mdi.key_rate import RateModel, SecurityParams, finite_size_overhead
from passive_mdi.optimizer import optimize_point, sweep

# golden values pinned on the first verified run
GOLDEN_CUTOFF_KM = 80.0  # first distance of the 5 km grid with zero optimized rate
GOLDEN_R_OPT_50KM = 1.6524e-5

SOURCE_GRID = [
    (mu, t, eta, d)
    for mu, t, (eta, d) in itertools.product(
        (0.05, 0.3, 1.0), (0.05, 0.25, 0.45),
        ((0.3, 1e-3), (0.5, 0.0), (0.75, 1e-6), (0.9, 1e-6), (1.0, 1e-4)),
    )
]


def test_source_completeness(report):
    assert len(SOURCE_GRID) == 45
    start = time.perf_counter()
    worst_sum = worst_closed = 0.0
    for mu, t, eta, d in SOURCE_GRID:
        params = source.SourceParams.symmetric(mu, t, eta, d)
        for n in range(21):
            per_event = [source.heralded_pn(ev, n, params) for ev in source.EVENTS]
            worst_sum = max(worst_sum, abs(sum(per_event) - stats.poisson.pmf(n, mu)))
            for state, value in zip(source.STATES, per_event):
                worst_closed = max(worst_closed, abs(value - source.heralded_pn_closed(state, n, params)))
    elapsed = time.perf_counter() - start
    ok = worst_sum <= 1e-14 and worst_closed <= 1e-12 and elapsed < 1.0
    report("source completeness", ok,
           f"max|sum-P_n|={worst_sum:.1e} (1e-14), max|split-closed|={worst_closed:.1e} (1e-12), {elapsed:.2f}s (<1s)")
    assert ok


def test_bsm_oracle_equivalence(report):
    assert len(checks.ORACLE_GRID) == 16
    start = time.perf_counter()
    dy, dye = checks.oracle_deviation(max_photons=3)
    elapsed = time.perf_counter() - start
    ok = dy <= 1e-10 and dye <= 1e-10 and elapsed < 60
    report("bsm oracle equivalence", ok, f"max|dY|={dy:.1e}, max|d(Ye)|={dye:.1e} (1e-10), {elapsed:.1f}s (<60s)")
    assert ok


def test_analytic_anchors(report):
    problems = []
    for d_C in (0.0, 1e-7, 1e-3):
        for distance, eta_C in itertools.product((0.0, 60.0), (0.4, 1.0)):
            t = fock_bsm.yield_table("Z", ChannelParams(total_distance=distance, eta_C=eta_C, d_C=d_C))
            expected = 4 * d_C**2 * (1 - d_C) ** 2
            if abs(t.Y[0, 0] - expected) > 1e-15 * max(expected, 1e-300):
                problems.append(f"Y00 d_C={d_C}")
    for eta_C in (0.4, 0.7, 1.0):
        for basis in "XZ":
            y, e = fock_bsm.yield_error(1, 1, basis, ChannelParams(total_distance=0, eta_C=eta_C, d_C=0, e_d=0))
            if abs(y - eta_C**2 / 2) > 1e-14 or abs(e) > 1e-14:
                problems.append(f"ideal Y11 {basis} eta_C={eta_C}")
    worst = 0.0
    for e_d in (0.005, 0.015, 0.03):
        for basis, distance in itertools.product("XZ", (0.0, 50.0)):
            _, e = fock_bsm.yield_error(1, 1, basis, ChannelParams(total_distance=distance, e_d=e_d))
            worst = max(worst, abs(e - e_d))
    if worst > 1e-3:
        problems.append("e11 vs e_d")
    report("analytic anchors", not problems,
           f"Y00 exact, ideal Y11=eta_C^2/2 with e11=0, max|e11-e_d|={worst:.1e} (1e-3)" if not problems
           else ", ".join(problems))
    assert not problems


@pytest.fixture(scope="module")
def sandwich():
    return checks.sandwich_points()


def _toy_recovery():
    d = source.heralded_distributions(source.SourceParams.symmetric(0.3, 0.3))
    tables = []
    for basis in "XZ":
        Y, e = np.zeros((11, 11)), np.full((11, 11), 0.5)
        Y[1, 1], e[1, 1] = 0.1, 0.02
        tables.append(YieldTable(basis=basis, Y=Y, e=e, n_cut=10))
    obs = protocol.exact_stats(d, d, *tables, 1e9)
    inputs = bound_inputs(obs, d, d, FluctuationParams(method="none"))
    y = float(y11_x_lower(inputs, 0.0))
    return abs(y - 0.1), abs(float(e11_x_upper(inputs, 0.0, y)) - 0.02)


def test_estimator_sandwich(report, sandwich):
    assert len(sandwich) == 24
    bad = [p for p in sandwich if not (p.y_min <= p.y_true and p.e_max >= p.e_true)]
    dy, de = _toy_recovery()
    slack = min(min(p.y_true - p.y_min for p in sandwich), min(p.e_max - p.e_true for p in sandwich))
    ok = not bad and dy <= 1e-12 and de <= 1e-12
    report("estimator sandwich", ok,
           f"{24 - len(bad)}/24 points bracket truth (min slack {slack:.1e}); toy |dY|={dy:.1e}, |de|={de:.1e} (1e-12)")
    assert ok


def test_range_soundness(report, sandwich):
    inside = [p for p in sandwich if 0.0 <= p.H <= p.h_hi]
    worst = max(p.H / p.h_hi for p in sandwich)
    ok = len(inside) == len(sandwich)
    report("vacuum range soundness", ok, f"{len(inside)}/{len(sandwich)} points with H in [0, 2T_ww], max H/upper={worst:.3f}")
    assert ok


def test_finite_size_overhead(report):
    value = finite_size_overhead(1e9, SecurityParams())
    ok = abs(value - 1.6777e-7) <= 1e-11
    report("finite-size overhead", ok, f"overhead(1e9)={value:.6e} vs 1.6777e-7 (tol 1e-11)")
    assert ok


@pytest.fixture(scope="module")
def curves():
    start = time.perf_counter()
    dist = sweep("distance", np.arange(0.0, 121.0, 5.0), N_t=1e9)
    size = sweep("data_size", [1e8, 1e9, 1e10, 1e11, 1e12], distance=50.0)
    return dist, size, time.perf_counter() - start


def test_rate_curve_shapes(report, curves):
    dist, size, elapsed = curves
    r, d = dist.rates, dist.values
    rtol = 1e-4
    at50 = float(r[d == 50.0][0])
    dist_ok = all(b <= a * (1 + rtol) for a, b in zip(r, r[1:]))
    size_ok = all(b >= a * (1 - rtol) for a, b in zip(size.rates, size.rates[1:]))
    zero = d[r <= 0]
    cutoff = float(zero[0]) if len(zero) else float("inf")
    cutoff_ok = abs(cutoff - GOLDEN_CUTOFF_KM) <= 5.0
    ok = at50 > 0 and dist_ok and size_ok and cutoff_ok and elapsed < 600
    report("rate curve shapes", ok,
           f"R(50km)={at50:.4e}>0, distance non-increasing={dist_ok}, N_t non-decreasing={size_ok}, "
           f"cutoff {cutoff:g} km (golden {GOLDEN_CUTOFF_KM:g}+-5), {elapsed:.0f}s (<600s)")
    assert ok
    assert at50 == pytest.approx(GOLDEN_R_OPT_50KM, rel=1e-3)


def _grid_best(distance, model):
    best = 0.0
    for mu in np.linspace(0.01, 1.5, 60):
        for t in np.linspace(0.01, 0.4999, 40):
            best = max(best, model.evaluate(mu, t, distance, 1e9).R)
    return best


def test_optimizer_quality(report):
    model = RateModel()
    ratios = {}
    for distance in (25.0, 50.0, 75.0):
        grid = _grid_best(distance, model)
        opt = optimize_point(distance, 1e9, model).R
        ratios[distance] = opt / grid if grid > 0 else float("nan")
    ok = all(v >= 0.98 for v in ratios.values())
    report("optimizer quality", ok,
           "R_opt/R_grid " + ", ".join(f"{d:g}km={v:.4f}" for d, v in ratios.items()) + " (>=0.98)")
    assert ok
