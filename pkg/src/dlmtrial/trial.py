"""Sequential trial loop: evolve -> forecast both arms -> weigh -> draw ->
observe -> condition -> evidence check.

``run_trial`` executes the loop against a simulated outcome generator;
``LiveSession`` exposes the same loop one patient at a time so a human
coordinator can supply real outcomes.  Both paths share ``TrialCore`` so a
replayed event log reproduces state bit-exactly.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .allocation import (
    AllocationWeights,
    Arm,
    ArmForecasts,
    WeightRule,
    draw_arm,
    weights_for,
)
from .dlm import DlmSpec, DlmState, Forecast, StatePrior, evolve, forecast_arm, update
from .errors import DegenerateSamples, InsufficientSamples, NumericalDomainError, ProtocolError
from .stopping import ArmSamples, BfPrior, BfResult, bf01, two_sample_t


@dataclass(frozen=True)
class OutcomeModel:
    """Simulation truth: arm means and a common outcome SD."""

    mu_a: float
    mu_b: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")

    def mean(self, arm: Arm) -> float:
        return self.mu_a if arm is Arm.A else self.mu_b


WEIGHT_SCALES = ("variance", "sd")
EVOLUTION_MODES = ("joint", "per_arm")


@dataclass(frozen=True)
class TrialConfig:
    budget: int
    rule: WeightRule
    dlm: DlmSpec
    init_m: np.ndarray
    init_c: np.ndarray
    bf_prior: BfPrior = BfPrior()
    bf_threshold: float = 0.01
    seed: int = 0
    truth: Optional[OutcomeModel] = None
    enforce_stop: bool = True
    negate_outcomes: bool = False
    # What the weight formulas receive as each arm's scale: the one-step
    # predictive variance, or its square root.
    weight_scale: str = "variance"
    # "joint": the whole state absorbs W once per patient.  "per_arm":
    # each arm's component evolves on that arm's own observation clock,
    # i.e. the filters behave as two independent univariate models; the
    # unobserved component's uncertainty does not accumulate.  Requires
    # G = I, diagonal W, and design rows with disjoint support.
    evolution: str = "joint"

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.weight_scale not in WEIGHT_SCALES:
            raise ValueError(f"weight_scale must be one of {WEIGHT_SCALES}")
        if self.evolution not in EVOLUTION_MODES:
            raise ValueError(f"evolution must be one of {EVOLUTION_MODES}")
        if self.evolution == "per_arm":
            spec = self.dlm
            if not np.array_equal(spec.G, np.eye(spec.state_dim)):
                raise ValueError("per_arm evolution requires G = I")
            if np.any(spec.W != np.diag(np.diag(spec.W))):
                raise ValueError("per_arm evolution requires diagonal W")
            if np.any(spec.design_a * spec.design_b != 0.0):
                raise ValueError("per_arm evolution requires design rows with disjoint support")
        init_state = DlmState(self.init_m, self.init_c, 0)
        object.__setattr__(self, "init_m", init_state.m)
        object.__setattr__(self, "init_c", init_state.C)

    def to_dict(self) -> dict:
        d = {
            "budget": self.budget,
            "rule": self.rule.value,
            "dlm": {
                "design_a": self.dlm.design_a.tolist(),
                "design_b": self.dlm.design_b.tolist(),
                "g": self.dlm.G.tolist(),
                "w": self.dlm.W.tolist(),
                "v": self.dlm.V,
            },
            "init_m": self.init_m.tolist(),
            "init_c": self.init_c.tolist(),
            "bf_prior": {
                "effect_mean": self.bf_prior.effect_mean,
                "effect_var": self.bf_prior.effect_var,
                "prior_odds": self.bf_prior.prior_odds,
            },
            "bf_threshold": self.bf_threshold,
            "seed": self.seed,
            "enforce_stop": self.enforce_stop,
            "negate_outcomes": self.negate_outcomes,
            "weight_scale": self.weight_scale,
            "evolution": self.evolution,
        }
        if self.truth is not None:
            d["truth"] = {
                "mu_a": self.truth.mu_a,
                "mu_b": self.truth.mu_b,
                "sigma": self.truth.sigma,
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialConfig":
        dlm = d["dlm"]
        truth = d.get("truth")
        return cls(
            budget=int(d["budget"]),
            rule=WeightRule(d["rule"]),
            dlm=DlmSpec(
                design_a=np.array(dlm["design_a"], dtype=float),
                design_b=np.array(dlm["design_b"], dtype=float),
                G=np.array(dlm["g"], dtype=float),
                W=np.array(dlm["w"], dtype=float),
                V=float(dlm["v"]),
            ),
            init_m=np.array(d["init_m"], dtype=float),
            init_c=np.array(d["init_c"], dtype=float),
            bf_prior=BfPrior(
                effect_mean=float(d["bf_prior"]["effect_mean"]),
                effect_var=float(d["bf_prior"]["effect_var"]),
                prior_odds=float(d["bf_prior"]["prior_odds"]),
            ),
            bf_threshold=float(d["bf_threshold"]),
            seed=int(d["seed"]),
            truth=None
            if truth is None
            else OutcomeModel(
                mu_a=float(truth["mu_a"]),
                mu_b=float(truth["mu_b"]),
                sigma=float(truth["sigma"]),
            ),
            enforce_stop=bool(d["enforce_stop"]),
            negate_outcomes=bool(d.get("negate_outcomes", False)),
            weight_scale=str(d.get("weight_scale", "variance")),
            evolution=str(d.get("evolution", "joint")),
        )

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def without_truth(self) -> "TrialConfig":
        return replace(self, truth=None)


def make_trial_config(
    *,
    budget: int,
    rule: WeightRule | str,
    omega: float,
    c_tb: float,
    c_ta: float = 1.0,
    v: float = 1.0,
    mu_a: float | None = None,
    mu_b: float | None = None,
    sigma: float | None = None,
    init_m: tuple[float, float] = (0.0, 0.0),
    bf_prior: BfPrior | None = None,
    bf_threshold: float = 0.01,
    seed: int = 0,
    enforce_stop: bool = True,
    negate_outcomes: bool = False,
    independent_arms: bool = False,
    weight_scale: str = "variance",
    evolution: str = "joint",
) -> TrialConfig:
    """Assemble the standard two-state configuration: identity system
    matrix, W = omega*I, prior covariance diag(c_ta, c_tb).

    With ``independent_arms`` the design rows are orthogonal and the two
    state components act as separate per-arm level filters; otherwise the
    second component is a treatment offset shared with arm B.
    """
    from .dlm import independent_arms_spec, standard_spec

    if isinstance(rule, str):
        rule = WeightRule(rule)
    truth = None
    if mu_a is not None or mu_b is not None or sigma is not None:
        truth = OutcomeModel(
            mu_a=0.0 if mu_a is None else mu_a,
            mu_b=0.0 if mu_b is None else mu_b,
            sigma=1.0 if sigma is None else sigma,
        )
    spec = independent_arms_spec(omega, v) if independent_arms else standard_spec(omega, v)
    return TrialConfig(
        budget=budget,
        rule=rule,
        dlm=spec,
        init_m=np.array(init_m, dtype=float),
        init_c=np.diag([c_ta, c_tb]).astype(float),
        bf_prior=bf_prior if bf_prior is not None else BfPrior(),
        bf_threshold=bf_threshold,
        seed=seed,
        truth=truth,
        enforce_stop=enforce_stop,
        negate_outcomes=negate_outcomes,
        weight_scale=weight_scale,
        evolution=evolution,
    )


@dataclass
class PatientRecord:
    """One enrolled patient: allocation context, draw, outcome, evidence."""

    t: int
    arm: Arm
    u: float
    y: float
    w_a: float
    f_a: float
    q_a: float
    f_b: float
    q_b: float
    bf01: Optional[float] = None

    @property
    def forecasts(self) -> ArmForecasts:
        return ArmForecasts(f_a=self.f_a, f_b=self.f_b, q_a=self.q_a, q_b=self.q_b)


@dataclass(frozen=True)
class TrialResult:
    records: list[PatientRecord]
    n_a: int
    n_b: int
    switch_index: Optional[int]
    first_crossing: Optional[int]
    allocation_switch_index: Optional[int]
    n_stop: int
    stopped: bool
    final_state: DlmState
    final_bf: Optional[BfResult]

    @property
    def stop(self) -> tuple[int, bool]:
        return self.n_stop, self.stopped


def detect_switch(w_sequence) -> Optional[int]:
    """First patient index (1-based) from which w_a stays above 1/2
    through the end of the sequence; None if it never does."""
    last_at_or_below = 0
    for i, w in enumerate(w_sequence, start=1):
        if w <= 0.5:
            last_at_or_below = i
    if last_at_or_below >= len(w_sequence):
        return None
    return last_at_or_below + 1


def first_crossing(w_sequence) -> Optional[int]:
    """First patient index (1-based) with w_a above 1/2; None if never."""
    for i, w in enumerate(w_sequence, start=1):
        if w > 0.5:
            return i
    return None


def allocation_switch(arms: list[Arm]) -> Optional[int]:
    """First patient index from which the running share of A allocations
    stays above 1/2 through the end; None if it never does.

    This is the count-based counterpart of ``detect_switch``: it reports
    when the realized allocation, not the weight, durably tips to A.
    """
    n_a = 0
    fractions = []
    for i, arm in enumerate(arms, start=1):
        if arm is Arm.A:
            n_a += 1
        fractions.append(n_a / i)
    return detect_switch(fractions)


class _Welford:
    """Running count/mean/sum-of-squared-deviations accumulator."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def add(self, y: float) -> None:
        self.n += 1
        delta = y - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (y - self.mean)


@dataclass(frozen=True)
class AllocationStep:
    """Everything computed before the arm is drawn for one patient."""

    prior: StatePrior
    fc_a: Forecast
    fc_b: Forecast
    weights: AllocationWeights

    @property
    def forecasts(self) -> ArmForecasts:
        return ArmForecasts(f_a=self.fc_a.f, f_b=self.fc_b.f, q_a=self.fc_a.Q, q_b=self.fc_b.Q)


class TrialCore:
    """State shared by simulation, live sessions, and replay: the filter
    belief, per-arm outcome accumulators, and the record list."""

    def __init__(self, config: TrialConfig):
        self.config = config
        self.state = DlmState(config.init_m, config.init_c, 0)
        self.acc = {Arm.A: _Welford(), Arm.B: _Welford()}
        self.records: list[PatientRecord] = []
        self.first_decisive: Optional[int] = None
        self.last_bf: Optional[BfResult] = None
        if config.evolution == "per_arm":
            # W restricted to each arm's own component(s): only the
            # observed arm commits its evolution noise to the posterior.
            spec = config.dlm
            self._w_masked = {
                Arm.A: spec.W * np.outer(spec.design_a != 0, spec.design_a != 0),
                Arm.B: spec.W * np.outer(spec.design_b != 0, spec.design_b != 0),
            }
        else:
            self._w_masked = None

    @property
    def t(self) -> int:
        return self.state.t

    def next_allocation(self) -> AllocationStep:
        spec = self.config.dlm
        prior = evolve(self.state, spec)
        fc_a = forecast_arm(prior, spec.design_a, spec.V)
        fc_b = forecast_arm(prior, spec.design_b, spec.V)
        if self.config.weight_scale == "sd":
            scale_a, scale_b = math.sqrt(fc_a.Q), math.sqrt(fc_b.Q)
        else:
            scale_a, scale_b = fc_a.Q, fc_b.Q
        fc = ArmForecasts(f_a=fc_a.f, f_b=fc_b.f, q_a=scale_a, q_b=scale_b)
        weights = weights_for(self.config.rule, fc)
        return AllocationStep(prior=prior, fc_a=fc_a, fc_b=fc_b, weights=weights)

    def apply_outcome(
        self, step: AllocationStep, u: float, arm: Arm, y: float
    ) -> tuple[PatientRecord, Optional[BfResult]]:
        """Condition on the outcome, refresh the evidence ratio, append the
        patient record.  ``y`` is the raw outcome; the model consumes its
        negation when the configuration asks for higher-is-better."""
        cfg = self.config
        y_model = -y if cfg.negate_outcomes else y
        design = cfg.dlm.design_a if arm is Arm.A else cfg.dlm.design_b
        fc = step.fc_a if arm is Arm.A else step.fc_b
        if self._w_masked is not None:
            # Commit evolution noise for the observed component only; the
            # one-step forecast for this arm is unchanged because the
            # design rows have disjoint support.
            prior = StatePrior(
                a=self.state.m, R=self.state.C + self._w_masked[arm], t=self.state.t
            )
            fc = forecast_arm(prior, design, cfg.dlm.V)
        else:
            prior = step.prior
        self.state = update(prior, design, fc, y_model)
        self.acc[arm].add(y_model)

        bf: Optional[BfResult] = None
        a, b = self.acc[Arm.A], self.acc[Arm.B]
        try:
            t_stat, dof, n_eff = two_sample_t(
                ArmSamples(n_a=a.n, n_b=b.n, mean_a=a.mean, mean_b=b.mean, ss_a=a.m2, ss_b=b.m2)
            )
            bf = bf01(t_stat, dof, n_eff, cfg.bf_prior, cfg.bf_threshold)
        except (InsufficientSamples, DegenerateSamples):
            bf = None
        if bf is not None:
            self.last_bf = bf
            if bf.decisive and self.first_decisive is None:
                self.first_decisive = self.state.t

        record = PatientRecord(
            t=self.state.t,
            arm=arm,
            u=u,
            y=y,
            w_a=step.weights.w_a,
            f_a=step.fc_a.f,
            q_a=step.fc_a.Q,
            f_b=step.fc_b.f,
            q_b=step.fc_b.Q,
            bf01=None if bf is None else bf.bf01,
        )
        self.records.append(record)
        return record, bf

    def result(self) -> TrialResult:
        w_path = [r.w_a for r in self.records]
        return TrialResult(
            records=self.records,
            n_a=self.acc[Arm.A].n,
            n_b=self.acc[Arm.B].n,
            switch_index=detect_switch(w_path),
            first_crossing=first_crossing(w_path),
            allocation_switch_index=allocation_switch([r.arm for r in self.records]),
            n_stop=self.first_decisive if self.first_decisive is not None else self.config.budget,
            stopped=self.first_decisive is not None,
            final_state=self.state,
            final_bf=self.last_bf,
        )


def run_trial(config: TrialConfig, rng: Optional[np.random.Generator] = None) -> TrialResult:
    """Run one simulated trial to its budget or to a decisive stop.

    The outcome generator draws Normal(mu_arm, sigma^2) per the config's
    truth.  With ``enforce_stop`` unset the loop always runs to budget and
    the stop index is still recorded from the evidence trajectory.
    """
    if config.truth is None:
        raise ValueError("run_trial needs a simulation truth in the config")
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    core = TrialCore(config)
    for _ in range(config.budget):
        step = core.next_allocation()
        u = rng.random()
        arm = draw_arm(step.weights, u)
        y = rng.normal(config.truth.mean(arm), config.truth.sigma)
        _, bf = core.apply_outcome(step, u, arm, y)
        if config.enforce_stop and bf is not None and bf.decisive:
            break
    return core.result()


class Phase(enum.Enum):
    AWAITING_ENROLL = "awaiting_enroll"
    AWAITING_OUTCOME = "awaiting_outcome"
    STOPPED = "stopped"
    EXHAUSTED = "exhausted"


class Recommendation(enum.Enum):
    CONTINUE = "continue"
    STOP_DECISIVE = "stop_decisive"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class EnrollmentTicket:
    """What the coordinator needs after enrolling one patient."""

    patient_index: int
    arm: Arm
    w_a: float
    forecasts: ArmForecasts


@dataclass(frozen=True)
class OutcomeSummary:
    t: int
    n_a: int
    n_b: int
    posterior_mean: tuple[float, ...]
    posterior_cov: tuple[tuple[float, ...], ...]
    bf: Optional[BfResult]
    recommendation: Recommendation


@dataclass
class _Pending:
    step: AllocationStep
    u: float
    arm: Arm
    override_stop: bool


class LiveSession:
    """One coordinator-driven trial.

    The uniform draws come from a generator seeded by the config, so a
    session is a pure fold over its (enroll, outcome) event sequence and
    can be replayed bit-exactly.  A decisive evidence ratio moves the
    session to STOPPED; enrollment from STOPPED requires an explicit
    override.  Reaching the budget moves it to EXHAUSTED for good.
    """

    def __init__(self, config: TrialConfig):
        self.config = config.without_truth()
        self.core = TrialCore(self.config)
        self.rng = np.random.default_rng(np.random.SeedSequence(self.config.seed))
        self.phase = Phase.AWAITING_ENROLL
        self.pending: Optional[_Pending] = None
        self.events: list[dict] = []

    @classmethod
    def create(cls, config: TrialConfig) -> "LiveSession":
        return cls(config)

    @property
    def t(self) -> int:
        return self.core.t

    @property
    def records(self) -> list[PatientRecord]:
        return self.core.records

    def _recommendation(self) -> Recommendation:
        if self.phase is Phase.EXHAUSTED:
            return Recommendation.BUDGET_EXHAUSTED
        bf = self.core.last_bf
        if bf is not None and bf.decisive:
            return Recommendation.STOP_DECISIVE
        return Recommendation.CONTINUE

    def enroll(self, override_stop: bool = False) -> EnrollmentTicket:
        if self.phase is Phase.AWAITING_OUTCOME:
            raise ProtocolError("previous patient's outcome is still pending")
        if self.phase is Phase.EXHAUSTED:
            raise ProtocolError("budget exhausted")
        if self.phase is Phase.STOPPED and not override_stop:
            raise ProtocolError("decisive stop recommended; enroll requires an explicit override")
        step = self.core.next_allocation()
        u = self.rng.random()
        arm = draw_arm(step.weights, u)
        self.pending = _Pending(step=step, u=u, arm=arm, override_stop=override_stop)
        self.phase = Phase.AWAITING_OUTCOME
        self.events.append({"event": "enroll", "override_stop": override_stop})
        return EnrollmentTicket(
            patient_index=self.core.t + 1,
            arm=arm,
            w_a=step.weights.w_a,
            forecasts=step.forecasts,
        )

    def record_outcome(self, y: float) -> OutcomeSummary:
        if self.phase is not Phase.AWAITING_OUTCOME:
            raise ProtocolError("no enrollment is awaiting an outcome")
        if not isinstance(y, (int, float)) or not math.isfinite(y):
            raise NumericalDomainError(f"outcome must be finite, got {y!r}")
        pending = self.pending
        assert pending is not None
        _, bf = self.core.apply_outcome(pending.step, pending.u, pending.arm, float(y))
        self.pending = None
        self.events.append({"event": "outcome", "y": float(y)})
        if self.core.t >= self.config.budget:
            self.phase = Phase.EXHAUSTED
        elif bf is not None and bf.decisive:
            self.phase = Phase.STOPPED
        else:
            self.phase = Phase.AWAITING_ENROLL
        return self.summary()

    def summary(self) -> OutcomeSummary:
        state = self.core.state
        return OutcomeSummary(
            t=state.t,
            n_a=self.core.acc[Arm.A].n,
            n_b=self.core.acc[Arm.B].n,
            posterior_mean=tuple(state.m.tolist()),
            posterior_cov=tuple(tuple(row) for row in state.C.tolist()),
            bf=self.core.last_bf,
            recommendation=self._recommendation(),
        )

    def snapshot(self) -> dict:
        """Lossless state: config plus the ordered event log."""
        return {
            "schema": 1,
            "config": self.config.to_dict(),
            "events": list(self.events),
            "phase": self.phase.value,
            "t": self.core.t,
        }

    @classmethod
    def replay(cls, config: TrialConfig, events: list[dict]) -> "LiveSession":
        """Rebuild a session by re-running its event sequence.

        Enrollment draws are regenerated from the seeded stream, so the
        rebuilt session matches the original bit for bit.
        """
        session = cls(config)
        for ev in events:
            if ev["event"] == "enroll":
                session.enroll(override_stop=bool(ev.get("override_stop", False)))
            elif ev["event"] == "outcome":
                session.record_outcome(float(ev["y"]))
            else:
                raise ValueError(f"unknown event kind {ev['event']!r}")
        return session

    @classmethod
    def from_snapshot(cls, snap: dict) -> "LiveSession":
        return cls.replay(TrialConfig.from_dict(snap["config"]), snap["events"])
