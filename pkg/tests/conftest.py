import time

import pytest

from dlmtrial.allocation import WeightRule
from dlmtrial.simulate import DEFAULT_SCENARIOS, SweepGrid, run_scenarios, run_sweep

ACCEPT_SEED = 42
ACCEPT_SIMS = 1000
JOBS = 2


@pytest.fixture(scope="session")
def sweep_cells():
    """The sensitivity-grid cells the acceptance criteria reference, keyed
    by (mu_b, omega, c_tb).  1000 trials per cell, shared across tests."""
    main = SweepGrid(
        mu_b_values=(1.0, 3.0, 5.0),
        omega_values=(0.1, 0.01, 0.001),
        c_tb_values=(0.000001,),
        n_sims=ACCEPT_SIMS,
    )
    extra = SweepGrid(
        mu_b_values=(1.0,),
        omega_values=(0.001,),
        c_tb_values=(0.1, 0.001),
        n_sims=ACCEPT_SIMS,
    )
    cells = {}
    for summary in run_sweep(main, ACCEPT_SEED, jobs=JOBS) + run_sweep(
        extra, ACCEPT_SEED, jobs=JOBS
    ):
        cells[(summary.mu_b, summary.omega, summary.c_tb)] = summary
    return cells


@pytest.fixture(scope="session")
def scenario_runs_zr():
    """Ratio-rule scenario runs at 1000 sims, with per-scenario wall time."""
    out = []
    for scenario in DEFAULT_SCENARIOS:
        start = time.perf_counter()
        [result] = run_scenarios(
            [scenario], WeightRule.ZHANG_ROSENBERGER, ACCEPT_SIMS, ACCEPT_SEED
        )
        out.append((result, time.perf_counter() - start))
    return out
