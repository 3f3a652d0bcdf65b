"""Adaptive two-arm trial allocation driven by a Gaussian state-space
filter, with Bayes-factor stopping, a Monte Carlo study harness, and a
live-session service."""

__version__ = "0.1.0"

from .allocation import (
    AllocationWeights,
    Arm,
    ArmForecasts,
    WeightRule,
    draw_arm,
    std_normal_cdf,
    weights_bb,
    weights_for,
    weights_zr,
)
from .dlm import (
    DlmSpec,
    DlmState,
    Forecast,
    StatePrior,
    evolve,
    forecast_arm,
    independent_arms_spec,
    standard_spec,
    update,
    update_detailed,
)
from .stopping import (
    ArmSamples,
    BfPrior,
    BfResult,
    bf01,
    stop_decision,
    stop_index,
    two_sample_t,
)
from .trial import (
    LiveSession,
    OutcomeModel,
    PatientRecord,
    Phase,
    Recommendation,
    TrialConfig,
    TrialResult,
    allocation_switch,
    detect_switch,
    first_crossing,
    make_trial_config,
    run_trial,
)
from .simulate import (
    DEFAULT_GRID,
    DEFAULT_SCENARIOS,
    ScenarioSpec,
    SweepGrid,
    SweepSummary,
    run_scenarios,
    run_sweep,
    stopping_table,
    trajectory_bands,
)

__all__ = [name for name in dir() if not name.startswith("_")]
