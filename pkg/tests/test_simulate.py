import numpy as np
import pytest

from dlmtrial.allocation import WeightRule
from dlmtrial.simulate import (
    DEFAULT_GRID,
    DEFAULT_SCENARIOS,
    ScenarioSpec,
    SweepGrid,
    run_cell,
    run_scenarios,
    run_sweep,
    stopping_table,
    trajectory_bands,
    trial_rng,
    _float_key,
)
from dlmtrial.trial import make_trial_config, run_trial


def test_default_grid_cardinality_and_order():
    cells = DEFAULT_GRID.cells()
    assert len(cells) == 45
    assert cells[0] == (1.0, 0.1, 0.1)
    assert cells[1] == (1.0, 0.1, 0.001)
    assert cells[-1] == (5.0, 0.001, 0.000001)
    assert len(DEFAULT_SCENARIOS) == 7


def test_trial_streams_are_reproducible_and_distinct():
    key = (_float_key(1.0), _float_key(0.1), _float_key(0.5))
    a = trial_rng(42, key, 0).random(4)
    b = trial_rng(42, key, 0).random(4)
    c = trial_rng(42, key, 1).random(4)
    d = trial_rng(43, key, 0).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_single_sim_scenario_equals_one_trial():
    scenario = ScenarioSpec(10.0, 15.0, 30, "tiny")
    [res] = [
        r
        for r in run_scenarios([scenario], WeightRule.ZHANG_ROSENBERGER, 1, seed=9)
    ]
    key = (_float_key(10.0), _float_key(15.0), 30)
    config = make_trial_config(
        budget=30, rule="zr", omega=0.1, c_ta=1.0, c_tb=1.0, v=1.0,
        mu_a=100.0, mu_b=110.0, sigma=15.0, seed=9, enforce_stop=False,
    )
    trial = run_trial(config, trial_rng(9, key, 0))
    assert res.mean_n_a == trial.n_a
    assert res.mean_n_b == trial.n_b
    assert res.selected_mean_count == min(trial.n_a, trial.n_b)
    assert res.mean_total_response == pytest.approx(sum(r.y for r in trial.records))


def test_scenario_zero_difference_stays_near_even():
    [res] = run_scenarios(
        [ScenarioSpec(0.0, 20.0, 128, "null")], WeightRule.ZHANG_ROSENBERGER, 60, seed=4
    )
    assert 0.47 <= res.mean_n_a / 128 <= 0.53


def test_sweep_cell_proportion_closure_and_quantile_order():
    grid = SweepGrid(n_sims=40, budget=60)
    cell = run_cell(3.0, 0.1, 1e-6, grid, seed=17)
    assert cell.mean_prop_a + cell.mean_prop_b == pytest.approx(1.0, abs=1e-12)
    assert cell.stop_quantiles[0] <= cell.stop_quantiles[1] <= cell.stop_quantiles[2]
    assert cell.switch_quantiles[0] <= cell.switch_quantiles[1] <= cell.switch_quantiles[2]
    assert 0.0 <= cell.p_exhaust <= 1.0
    assert len(cell.band_mean) == 60
    assert np.all(cell.band_lo <= cell.band_mean) and np.all(cell.band_mean <= cell.band_hi)
    assert cell.mean_switch == pytest.approx(60 * (1 - cell.mean_frac_a), abs=1e-9)


def test_sweep_deterministic_across_parallelism():
    grid = SweepGrid(
        mu_b_values=(2.0, 5.0), omega_values=(0.1,), c_tb_values=(0.001, 1e-6),
        n_sims=25, budget=40,
    )
    serial = run_sweep(grid, seed=8, jobs=1)
    parallel = run_sweep(grid, seed=8, jobs=2)
    assert len(serial) == len(parallel) == 4
    for a, b in zip(serial, parallel):
        assert a.row() == b.row()
        assert np.array_equal(a.band_mean, b.band_mean)
        assert np.array_equal(a.band_lo, b.band_lo)
        assert np.array_equal(a.band_hi, b.band_hi)


def test_stopping_table_mirrors_summaries():
    grid = SweepGrid(mu_b_values=(4.0,), omega_values=(0.1,), c_tb_values=(1e-6,), n_sims=20, budget=30)
    summaries = run_sweep(grid, seed=2, jobs=1)
    [row] = stopping_table(summaries)
    assert row.stop_q50 == summaries[0].stop_quantiles[1]
    assert row.p_exhaust == summaries[0].p_exhaust
    assert row.median_bf_at_budget == summaries[0].median_bf_at_budget


def test_degenerate_quantiles_collapse():
    values = np.full(50, 33.0)
    q = np.quantile(values, (0.025, 0.5, 0.975), method="linear")
    assert tuple(q) == (33.0, 33.0, 33.0)


def test_trajectory_bands_trivial_cases():
    mean, lo, hi = trajectory_bands([[0.5] * 10] * 7, budget=10)
    assert np.array_equal(mean, np.full(10, 0.5))
    assert np.array_equal(lo, hi)

    mean, lo, hi = trajectory_bands([[0.4] * 10, [0.6] * 10], budget=10)
    assert np.allclose(mean, 0.5, atol=1e-15)

    mean, _, _ = trajectory_bands([[0.2, 0.8], [0.4] * 6], budget=6)
    # the first path carries its final weight 0.8 through the padding
    assert mean[-1] == pytest.approx((0.8 + 0.4) / 2, abs=1e-15)
    with pytest.raises(ValueError):
        trajectory_bands([[]], budget=3)


def test_scenarios_parallel_equals_serial():
    scenarios = DEFAULT_SCENARIOS[:2]
    serial = run_scenarios(scenarios, WeightRule.BISWAS_BHATTACHARYA, 15, seed=6, jobs=1)
    parallel = run_scenarios(scenarios, WeightRule.BISWAS_BHATTACHARYA, 15, seed=6, jobs=2)
    assert [r.row() for r in serial] == [r.row() for r in parallel]
