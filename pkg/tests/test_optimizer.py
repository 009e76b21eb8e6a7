import math

import numpy as np
import pytest

from passive_mdi import source
from passive_mdi.key_rate import RateModel
from passive_mdi.optimizer import (
    InfeasibleError,
    OptimizationSpec,
    maximize,
    optimize_point,
    sweep,
)


def planted(mu, t):
    return -((mu - 0.3) ** 2) - (t - 0.2) ** 2


def test_planted_optimum():
    mu, t, value, n = maximize(planted, OptimizationSpec(rtol=1e-10))
    assert abs(mu - 0.3) < 1e-3 and abs(t - 0.2) < 1e-3
    assert value <= 0 and n > 0


def test_planted_optimum_on_the_boundary():
    mu, t, _, _ = maximize(lambda m, t: -((m - 2.0) ** 2) - (t - 0.2) ** 2, OptimizationSpec(rtol=1e-10))
    assert mu == pytest.approx(1.5, abs=1e-6) and abs(t - 0.2) < 1e-3


def test_all_infeasible():
    with pytest.raises(InfeasibleError):
        maximize(lambda mu, t: -math.inf, OptimizationSpec(multistart=2))


def test_starts():
    spec = OptimizationSpec(multistart=7, seed=1)
    starts = spec.starts(warm=(0.3, 0.2))
    assert len(starts) == 8
    assert starts[1:6] == [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75), (0.5, 0.5)]
    assert starts == spec.starts(warm=(0.3, 0.2))
    assert np.allclose(spec.to_box(spec.to_unit(0.3, 0.2)), (0.3, 0.2))


@pytest.mark.parametrize("bad", [dict(mu_bounds=(0.0, 1.0)), dict(t_bounds=(0.1, 0.5)), dict(rtol=0.0),
                                 dict(multistart=0)])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        OptimizationSpec(**bad)


@pytest.fixture(scope="module")
def point_50km():
    return optimize_point(50.0, 1e9)


def test_optimum_is_fresh_and_feasible(point_50km):
    p = point_50km
    assert p.R > 0
    fresh = RateModel().evaluate(p.mu, p.t, 50.0, 1e9)
    assert abs(fresh.R - p.R) <= 1e-12
    assert source.check_ratio_condition(source.SourceParams.symmetric(p.mu, p.t))[0]
    assert 0.01 <= p.mu <= 1.5 and 0.01 <= p.t <= 0.4999


def test_determinism(point_50km):
    again = optimize_point(50.0, 1e9)
    assert (again.mu, again.t, again.R) == (point_50km.mu, point_50km.t, point_50km.R)


def test_parallel_matches_serial(point_50km):
    par = optimize_point(50.0, 1e9, workers=2)
    assert (par.mu, par.t, par.R) == (point_50km.mu, point_50km.t, point_50km.R)


def test_single_point_sweep_equals_optimize_point(point_50km):
    res = sweep("distance", [50.0], N_t=1e9)
    row = res.rows[0]
    assert (row.mu, row.t, row.R) == (point_50km.mu, point_50km.t, point_50km.R)
    assert row.status == "ok"


def test_sweep_validation():
    with pytest.raises(ValueError):
        sweep("distance", [])
    with pytest.raises(ValueError):
        sweep("distance", [10.0, 5.0])
    with pytest.raises(ValueError):
        sweep("speed", [1.0])


def test_failed_points_become_rows():
    # a ratio-violating model has no feasible point anywhere
    res = sweep("distance", [10.0, 20.0], RateModel(eta_A=1.0), OptimizationSpec(multistart=1, max_evals=10))
    assert len(res.rows) == 2
    assert all(r.status.startswith("failed") and math.isnan(r.R) for r in res.rows)


def test_short_distance_sweep_monotone():
    res = sweep("distance", [0.0, 20.0, 40.0], N_t=1e9)
    rates = res.rates
    assert np.all(rates > 0)
    assert np.all(np.diff(rates) <= 1e-4 * rates[:-1])
    assert list(res.values) == [0.0, 20.0, 40.0]
