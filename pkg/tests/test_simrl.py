import math

import numpy as np
import pytest
from scipy import stats

from steinspc import ChangeScenario, ChartSpec, CountModel, ced, table, zero_state_arl
from steinspc.exceptions import EstimationError, ParameterError
from steinspc.simrl import run_lengths, simulate_run_lengths
from steinspc.stein import WeightFunction

POI2 = CountModel.poisson(2.0)


def test_cchart_arl_matches_geometric_oracle():
    # run length of a c-chart is geometric with success probability P(X >= k)
    spec = ChartSpec("c", 2.0, c_threshold=5)
    p = stats.poisson.sf(4, 2.0)
    res = zero_state_arl(spec, POI2, reps=20_000, seed=5)
    sd = math.sqrt(1 - p) / p
    assert abs(res.mean - 1 / p) < 4 * sd / math.sqrt(res.reps_used)
    assert res.se == pytest.approx(sd / math.sqrt(res.reps_used), rel=0.05)


def test_ewma_zero_width_alarms_unless_fixed_point():
    spec = ChartSpec("ewma", 2.0, 0.1, L=0.0)
    assert 0.1 * 2 + 0.9 * 2.0 == 2.0  # x = mu0 keeps the statistic on the center line
    q = stats.poisson.pmf(2, 2.0)
    res = zero_state_arl(spec, POI2, reps=20_000, seed=1)
    expected = 1 / (1 - q)
    sd = math.sqrt(q) / (1 - q)
    assert abs(res.mean - expected) < 4 * sd / math.sqrt(20_000)


def test_zero_width_immediate_alarm_without_fixed_point():
    # mu0 = 2.5 is not an integer: every count moves the statistic
    res = zero_state_arl(ChartSpec("ewma", 2.5, 0.1, L=0.0), CountModel.poisson(2.5), reps=500, seed=1)
    assert res.mean == 1.0
    assert res.se == 0.0


def test_ced_tau_one_equals_zero_state():
    spec = ChartSpec("abc", 2.0, 0.1, "abslinear", L=0.463)
    nb = CountModel.negbin(2.0, 5 / 3)
    z = zero_state_arl(spec, nb, reps=2000, seed=9)
    c = ced(spec, ChangeScenario(POI2, nb, 1), reps=2000, seed=9)
    assert z.mean == c.mean and z.se == c.se
    assert c.reps_discarded == 0
    assert np.array_equal(z.run_lengths, c.run_lengths)


def test_deterministic_and_worker_independent():
    spec = ChartSpec("ab", 2.0, 0.1, "log", L=1.089)
    scen = ChangeScenario(POI2, CountModel.zip(2.0, 5 / 3), 1)
    a = run_lengths(spec, scen, seed=3, reps=6000, max_t=37000, n_jobs=1)
    b = run_lengths(spec, scen, seed=3, reps=6000, max_t=37000, n_jobs=2)
    assert np.array_equal(a, b)
    # replication r depends only on (seed, cell, r)
    part = simulate_run_lengths(spec, scen, 3, 0, 2500, 2600, 37000)
    assert np.array_equal(part, a[2500:2600])


def test_crn_monotone_in_L():
    scen = ChangeScenario(POI2, POI2, 1)
    rls = [
        run_lengths(ChartSpec("ewma", 2.0, 0.1, L=L), scen, seed=17, reps=1000, max_t=37000)
        for L in (0.4, 0.877, 1.2)
    ]
    assert (rls[0] <= rls[1]).all() and (rls[1] <= rls[2]).all()


def test_ced_discards_and_budget():
    spec = ChartSpec("ewma", 2.0, 0.1, L=0.6)  # short in-control ARL, many false alarms
    tau = 50
    res = ced(spec, ChangeScenario(POI2, POI2, tau), reps=3000, seed=21)
    assert res.reps_used == 3000
    assert res.reps_used + res.reps_discarded == res.reps_attempted
    assert res.reps_discarded > 0
    # discard share vs an independent estimate of P(RL0 < tau)
    rl0 = zero_state_arl(spec, POI2, reps=20_000, seed=22, cell=1).run_lengths
    p_ind = float((rl0 < tau).mean())
    p_ced = res.reps_discarded / res.reps_attempted
    se = math.sqrt(p_ind * (1 - p_ind) * (1 / res.reps_attempted + 1 / rl0.size))
    assert abs(p_ced - p_ind) < 3 * se


def test_censoring_reported():
    spec = ChartSpec("ewma", 2.0, 0.1, L=0.877)
    res = zero_state_arl(spec, POI2, reps=500, seed=2, max_t=50)
    assert res.reps_censored > 0
    assert res.run_lengths.max() == 50
    assert res.mean <= 50


def test_all_censored_is_an_error():
    spec = ChartSpec("ewma", 2.0, 0.1, L=5.0)
    with pytest.raises(EstimationError):
        zero_state_arl(spec, POI2, reps=50, seed=2, max_t=20)


def test_all_discarded_is_an_error():
    spec = ChartSpec("ewma", 2.5, 0.1, L=0.0)  # alarms at t = 1
    with pytest.raises(EstimationError):
        ced(spec, ChangeScenario(CountModel.poisson(2.5), CountModel.poisson(2.5), 5), reps=20, seed=1, max_rounds=3)


def test_bad_arguments():
    spec = ChartSpec("ewma", 2.0, 0.1, L=0.877)
    with pytest.raises(ParameterError):
        zero_state_arl(spec, POI2, reps=0)
    with pytest.raises(ParameterError):
        ChangeScenario(POI2, POI2, 0)
    with pytest.raises(ParameterError):
        ced(spec, ChangeScenario(POI2, POI2, 100), reps=10, max_t=50)


def test_table_empty_and_per_cell_errors():
    assert table([], reps=10) == []
    good = ChartSpec("ewma", 2.0, 0.1, L=0.877)
    bad = ChartSpec("ab", 2.0, 0.1, WeightFunction.table([1.0, 0.0, 0.0]), L=1.0)
    scen = ChangeScenario(POI2, CountModel.poisson(2.25), 1)
    cells = table([(good, scen, {"name": "good"}), (bad, scen, {"name": "bad"})], reps=200, seed=4)
    assert cells[0].stats is not None and cells[0].error is None
    assert cells[1].stats is None and "SpecError" in cells[1].error
    assert cells[0].label == {"name": "good"}


def test_table_cells_use_their_own_substreams():
    spec = ChartSpec("ewma", 2.0, 0.1, L=0.877)
    scen = ChangeScenario(POI2, CountModel.poisson(2.25), 1)
    cells = table([(spec, scen), (spec, scen)], reps=300, seed=8)
    assert cells[0].stats.mean != cells[1].stats.mean
    again = zero_state_arl(spec, CountModel.poisson(2.25), reps=300, seed=8, cell=1)
    assert again.mean == cells[1].stats.mean


def test_table_ced_cells():
    spec = ChartSpec("abc", 2.0, 0.1, "abslinear", L=0.463)
    scen = ChangeScenario(POI2, CountModel.zip(2.0, 5 / 3), 20)
    (cell,) = table([(spec, scen)], reps=300, seed=8)
    assert cell.stats.reps_used == 300


def test_to_dict_drops_raw_run_lengths():
    res = zero_state_arl(ChartSpec("c", 2.0, c_threshold=4), POI2, reps=100, seed=1)
    d = res.to_dict()
    assert "run_lengths" not in d and d["reps_used"] == 100
