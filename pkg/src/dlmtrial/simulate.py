"""Monte Carlo harness: the seven standard scenarios, the sensitivity
grid over (mu_b, omega, c_tb), and the aggregates behind the summary
tables and the weight-trajectory band plots.

Every trial draws from its own generator stream keyed by (master seed,
cell parameters, trial index), so results are bit-identical at any
parallelism level and reductions always run in trial-index order.
"""

from __future__ import annotations

import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .allocation import WeightRule
from .stopping import BfPrior
from .trial import TrialResult, make_trial_config, run_trial

QUANTILE_PROBS = (0.025, 0.5, 0.975)


def _float_key(x: float) -> int:
    """Stable integer key for a float (its IEEE-754 bit pattern)."""
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def trial_rng(master_seed: int, cell_key: tuple[int, ...], trial_index: int) -> np.random.Generator:
    """Independent stream for one trial, reproducible regardless of which
    other cells or trials run alongside it."""
    entropy = [int(master_seed), *cell_key, int(trial_index)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation scenario: true mean difference, outcome SD, and the
    planned sample budget."""

    mean_difference: float
    sd: float
    budget: int
    label: str = ""


DEFAULT_SCENARIOS: tuple[ScenarioSpec, ...] = (
    ScenarioSpec(0.0, 20.0, 128, "S1"),
    ScenarioSpec(10.0, 15.0, 74, "S2"),
    ScenarioSpec(10.0, 20.0, 128, "S3"),
    ScenarioSpec(10.0, 25.0, 200, "S4"),
    ScenarioSpec(20.0, 20.0, 34, "S5"),
    ScenarioSpec(20.0, 25.0, 52, "S6"),
    ScenarioSpec(20.0, 30.0, 74, "S7"),
)


@dataclass(frozen=True)
class ScenarioResult:
    scenario: ScenarioSpec
    rule: WeightRule
    n_sims: int
    mean_n_a: float
    mean_n_b: float
    selected_arm: str
    selected_mean_count: float
    mean_total_response: float

    def row(self) -> dict:
        return {
            "label": self.scenario.label,
            "mean_difference": self.scenario.mean_difference,
            "sd": self.scenario.sd,
            "budget": self.scenario.budget,
            "rule": self.rule.value,
            "n_sims": self.n_sims,
            "mean_n_a": self.mean_n_a,
            "mean_n_b": self.mean_n_b,
            "selected_arm": self.selected_arm,
            "selected_mean_count": self.selected_mean_count,
            "mean_total_response": self.mean_total_response,
        }


def _run_scenario(
    scenario: ScenarioSpec,
    rule: WeightRule,
    n_sims: int,
    master_seed: int,
    omega: float,
    c_ta: float,
    c_tb: float,
    baseline: float,
    v: float,
) -> ScenarioResult:
    cell_key = (_float_key(scenario.mean_difference), _float_key(scenario.sd), scenario.budget)
    config = make_trial_config(
        budget=scenario.budget,
        rule=rule,
        omega=omega,
        c_ta=c_ta,
        c_tb=c_tb,
        v=v,
        mu_a=baseline,
        mu_b=baseline + scenario.mean_difference,
        sigma=scenario.sd,
        seed=master_seed,
        enforce_stop=False,
    )
    n_a = np.empty(n_sims)
    n_b = np.empty(n_sims)
    totals = np.empty(n_sims)
    for i in range(n_sims):
        res = run_trial(config, trial_rng(master_seed, cell_key, i))
        n_a[i] = res.n_a
        n_b[i] = res.n_b
        totals[i] = sum(r.y for r in res.records)
    mean_a = float(n_a.mean())
    mean_b = float(n_b.mean())
    selected = "A" if mean_a <= mean_b else "B"
    return ScenarioResult(
        scenario=scenario,
        rule=rule,
        n_sims=n_sims,
        mean_n_a=mean_a,
        mean_n_b=mean_b,
        selected_arm=selected,
        selected_mean_count=min(mean_a, mean_b),
        mean_total_response=float(totals.mean()),
    )


def run_scenarios(
    scenarios: Sequence[ScenarioSpec],
    rule: WeightRule,
    n_sims: int,
    seed: int,
    *,
    omega: float = 0.1,
    c_ta: float = 1.0,
    c_tb: float = 1.0,
    baseline: float = 100.0,
    v: float = 1.0,
    jobs: int = 1,
) -> list[ScenarioResult]:
    """Run every scenario to its full budget (stopping disabled) and
    average the arm counts.  The smaller mean count is reported as the
    selected arm.

    Arm means are baseline and baseline + mean_difference.  The ratio
    rule takes square roots of forecast means, so the baseline keeps the
    outcome scale positive; it cancels out of the smooth rule.
    """
    args = [(sc, rule, n_sims, seed, omega, c_ta, c_tb, baseline, v) for sc in scenarios]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_scenario_star, args))
    return [_run_scenario(*a) for a in args]


def _run_scenario_star(args) -> ScenarioResult:
    return _run_scenario(*args)


@dataclass(frozen=True)
class SweepGrid:
    """Cartesian sensitivity grid, enumerated in deterministic order.

    Cells run the smooth weight rule on two independent per-arm filters
    with the predictive SD as the weight scale and a common prior
    variance (c_ta = None means "equal to the cell's c_tb"); this is the
    configuration that reproduces the reference allocation proportions.
    """

    mu_b_values: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0)
    omega_values: tuple[float, ...] = (0.1, 0.01, 0.001)
    c_tb_values: tuple[float, ...] = (0.1, 0.001, 0.000001)
    budget: int = 100
    n_sims: int = 1000
    v: float = 1.0
    sigma: float = 1.0
    mu_a: float = 0.0
    c_ta: float | None = None
    rule: WeightRule = WeightRule.BISWAS_BHATTACHARYA
    bf_prior: BfPrior = field(default_factory=BfPrior)
    bf_threshold: float = 0.01
    independent_arms: bool = True
    weight_scale: str = "sd"
    evolution: str = "per_arm"

    def cells(self) -> list[tuple[float, float, float]]:
        return [
            (mu_b, omega, c_tb)
            for mu_b in self.mu_b_values
            for omega in self.omega_values
            for c_tb in self.c_tb_values
        ]


DEFAULT_GRID = SweepGrid()


@dataclass(frozen=True)
class SweepSummary:
    """Aggregates for one grid cell over its simulated trials.

    mean_prop_a averages the allocation weight over patients and trials
    (the quantity the trajectory bands average); mean_frac_a is the
    realized share of patients on arm A.  mean_switch is the mean count
    of patients allocated to the initially favored arm B, which equals
    the switch point when the allocation path is step-like; the
    crossing-based switch index of the running allocation share is
    reported alongside (mean_crossing over the n_switched trials where
    it exists, quantiles filling never-switched trials with the budget).
    """

    mu_b: float
    omega: float
    c_tb: float
    n_sims: int
    budget: int
    mean_prop_a: float
    mean_prop_b: float
    mean_frac_a: float
    mean_switch: float
    mean_crossing: Optional[float]
    n_switched: int
    switch_quantiles: tuple[float, float, float]
    stop_quantiles: tuple[float, float, float]
    p_exhaust: float
    median_bf_at_budget: float
    mean_bf_at_budget: float
    band_mean: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray

    def row(self) -> dict:
        return {
            "mu_b": self.mu_b,
            "omega": self.omega,
            "c_tb": self.c_tb,
            "n_sims": self.n_sims,
            "budget": self.budget,
            "mean_prop_a": self.mean_prop_a,
            "mean_prop_b": self.mean_prop_b,
            "mean_frac_a": self.mean_frac_a,
            "mean_switch": self.mean_switch,
            "mean_crossing": self.mean_crossing,
            "n_switched": self.n_switched,
            "switch_q025": self.switch_quantiles[0],
            "switch_q50": self.switch_quantiles[1],
            "switch_q975": self.switch_quantiles[2],
            "stop_q025": self.stop_quantiles[0],
            "stop_q50": self.stop_quantiles[1],
            "stop_q975": self.stop_quantiles[2],
            "p_exhaust": self.p_exhaust,
            "median_bf_at_budget": self.median_bf_at_budget,
            "mean_bf_at_budget": self.mean_bf_at_budget,
        }


def trajectory_bands(
    paths: Sequence[Sequence[float]], budget: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise mean and 2.5/97.5 percentile band over weight paths.

    Shorter paths (stopped trials) are padded by carrying their last
    weight forward to the budget.
    """
    mat = np.empty((len(paths), budget))
    for i, path in enumerate(paths):
        k = len(path)
        if k == 0:
            raise ValueError("empty weight path")
        mat[i, :k] = path
        if k < budget:
            mat[i, k:] = path[k - 1]
    mean = mat.mean(axis=0)
    lo, hi = np.quantile(mat, (0.025, 0.975), axis=0, method="linear")
    return mean, lo, hi


def _summarize_cell(
    mu_b: float,
    omega: float,
    c_tb: float,
    grid: SweepGrid,
    results: Sequence[TrialResult],
) -> SweepSummary:
    budget = grid.budget
    n = len(results)
    frac_a = np.array([r.n_a / budget for r in results])
    n_b = np.array([r.n_b for r in results], dtype=float)
    crossings = [r.allocation_switch_index for r in results]
    crossed = [s for s in crossings if s is not None]
    n_stop = np.array([r.n_stop for r in results], dtype=float)
    bf_end = np.array([np.nan if r.final_bf is None else r.final_bf.bf01 for r in results])
    mean, lo, hi = trajectory_bands([[rec.w_a for rec in r.records] for r in results], budget)
    mean_prop_a = float(mean.mean())
    return SweepSummary(
        mu_b=mu_b,
        omega=omega,
        c_tb=c_tb,
        n_sims=n,
        budget=budget,
        mean_prop_a=mean_prop_a,
        mean_prop_b=1.0 - mean_prop_a,
        mean_frac_a=float(frac_a.mean()),
        mean_switch=float(n_b.mean()),
        mean_crossing=float(np.mean(crossed)) if crossed else None,
        n_switched=len(crossed),
        switch_quantiles=tuple(np.quantile(n_b, QUANTILE_PROBS, method="linear")),
        stop_quantiles=tuple(np.quantile(n_stop, QUANTILE_PROBS, method="linear")),
        p_exhaust=float(np.mean(n_stop >= budget)),
        median_bf_at_budget=float(np.nanmedian(bf_end)),
        mean_bf_at_budget=float(np.nanmean(bf_end)),
        band_mean=mean,
        band_lo=lo,
        band_hi=hi,
    )


def run_cell(mu_b: float, omega: float, c_tb: float, grid: SweepGrid, seed: int) -> SweepSummary:
    """All trials for one grid cell, reduced in trial-index order.

    Trials run to the full budget; the stop index is recorded from the
    evidence trajectory without truncating allocation."""
    cell_key = (_float_key(mu_b), _float_key(omega), _float_key(c_tb))
    config = make_trial_config(
        budget=grid.budget,
        rule=grid.rule,
        omega=omega,
        c_ta=c_tb if grid.c_ta is None else grid.c_ta,
        c_tb=c_tb,
        v=grid.v,
        mu_a=grid.mu_a,
        mu_b=mu_b,
        sigma=grid.sigma,
        bf_prior=grid.bf_prior,
        bf_threshold=grid.bf_threshold,
        seed=seed,
        enforce_stop=False,
        independent_arms=grid.independent_arms,
        weight_scale=grid.weight_scale,
        evolution=grid.evolution,
    )
    results = [
        run_trial(config, trial_rng(seed, cell_key, i)) for i in range(grid.n_sims)
    ]
    return _summarize_cell(mu_b, omega, c_tb, grid, results)


def _run_cell_star(args) -> SweepSummary:
    return run_cell(*args)


def run_sweep(grid: SweepGrid, seed: int, jobs: int = 1) -> list[SweepSummary]:
    """One SweepSummary per grid cell, in grid enumeration order."""
    args = [(mu_b, omega, c_tb, grid, seed) for (mu_b, omega, c_tb) in grid.cells()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell_star, args))
    return [run_cell(*a) for a in args]


@dataclass(frozen=True)
class StoppingRow:
    mu_b: float
    omega: float
    c_tb: float
    stop_q025: float
    stop_q50: float
    stop_q975: float
    p_exhaust: float
    median_bf_at_budget: float

    def row(self) -> dict:
        return {
            "mu_b": self.mu_b,
            "omega": self.omega,
            "c_tb": self.c_tb,
            "stop_q025": self.stop_q025,
            "stop_q50": self.stop_q50,
            "stop_q975": self.stop_q975,
            "p_exhaust": self.p_exhaust,
            "median_bf_at_budget": self.median_bf_at_budget,
        }


def stopping_table(summaries: Sequence[SweepSummary]) -> list[StoppingRow]:
    """Stop-index quantiles, exhaustion probability, and the median
    evidence ratio at the budget, one row per cell."""
    return [
        StoppingRow(
            mu_b=s.mu_b,
            omega=s.omega,
            c_tb=s.c_tb,
            stop_q025=s.stop_quantiles[0],
            stop_q50=s.stop_quantiles[1],
            stop_q975=s.stop_quantiles[2],
            p_exhaust=s.p_exhaust,
            median_bf_at_budget=s.median_bf_at_budget,
        )
        for s in summaries
    ]
