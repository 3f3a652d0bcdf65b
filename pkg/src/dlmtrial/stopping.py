"""Bayes-factor stopping: pooled two-sample t statistic and the ratio of
Student-t marginal likelihoods under the no-difference and difference
hypotheses.

bf01 = dens(t | dof, 0, 1) / dens(t | dof, sqrt(n_eff)*lam, 1 + n_eff*var)

where dens is the location-scale Student-t density.  Values at or below
the threshold (default 1/100) count as decisive evidence against "no
difference" and recommend stopping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DegenerateSamples, InsufficientSamples, NumericalDomainError

DECISIVE_THRESHOLD = 0.01


@dataclass(frozen=True)
class ArmSamples:
    """Per-arm sufficient statistics: counts, means, and within-arm sums
    of squared deviations."""

    n_a: int
    n_b: int
    mean_a: float
    mean_b: float
    ss_a: float
    ss_b: float

    def __post_init__(self):
        if self.n_a < 0 or self.n_b < 0:
            raise ValueError("sample counts must be non-negative")
        if self.ss_a < 0.0 or self.ss_b < 0.0:
            raise ValueError("sums of squared deviations must be non-negative")


@dataclass(frozen=True)
class BfPrior:
    """Prior on the standardized effect under the difference hypothesis:
    effect ~ N(effect_mean, effect_var).  prior_odds = P(H0)/P(H1)."""

    effect_mean: float = 0.0
    effect_var: float = 2.0
    prior_odds: float = 1.0

    def __post_init__(self):
        if self.effect_var < 0.0:
            raise ValueError("effect_var must be non-negative")
        if self.prior_odds <= 0.0:
            raise ValueError("prior_odds must be positive")


@dataclass(frozen=True)
class BfResult:
    bf01: float
    t_stat: float
    dof: float
    n_eff: float
    decisive: bool
    post_prob_h0: float


def two_sample_t(s: ArmSamples) -> tuple[float, float, float]:
    """Pooled-variance two-sample t.

    Returns (t, dof, n_eff) with dof = n_a + n_b - 2 and
    n_eff = (1/n_a + 1/n_b)^-1.  Needs at least two observations per arm;
    a zero pooled variance raises DegenerateSamples.
    """
    if s.n_a < 2 or s.n_b < 2:
        raise InsufficientSamples(f"need >= 2 per arm, have ({s.n_a}, {s.n_b})")
    dof = s.n_a + s.n_b - 2
    pooled_var = (s.ss_a + s.ss_b) / dof
    if pooled_var <= 0.0:
        raise DegenerateSamples("pooled variance is zero")
    n_eff = 1.0 / (1.0 / s.n_a + 1.0 / s.n_b)
    t = (s.mean_a - s.mean_b) / math.sqrt(pooled_var * (1.0 / s.n_a + 1.0 / s.n_b))
    return t, float(dof), n_eff


def student_t_logpdf(x: float, dof: float) -> float:
    """Log density of the standard Student-t with ``dof`` degrees of freedom."""
    if dof <= 0.0:
        raise ValueError(f"dof must be positive, got {dof}")
    half = (dof + 1.0) / 2.0
    return (
        math.lgamma(half)
        - math.lgamma(dof / 2.0)
        - 0.5 * math.log(dof * math.pi)
        - half * math.log1p(x * x / dof)
    )


def location_scale_t_logpdf(x: float, dof: float, loc: float, scale_sq: float) -> float:
    """Log density of loc + sqrt(scale_sq) * T_dof at ``x``."""
    if scale_sq <= 0.0:
        raise ValueError(f"scale_sq must be positive, got {scale_sq}")
    scale = math.sqrt(scale_sq)
    return student_t_logpdf((x - loc) / scale, dof) - math.log(scale)


def bf01(
    t: float,
    dof: float,
    n_eff: float,
    prior: BfPrior,
    threshold: float = DECISIVE_THRESHOLD,
) -> BfResult:
    """Evidence ratio for "no difference" over "difference" at the
    observed t.  Computed in log space; decisive iff bf01 <= threshold."""
    scale_sq = 1.0 + n_eff * prior.effect_var
    if not (dof > 0.0 and scale_sq > 0.0):
        raise NumericalDomainError("bf01 needs dof > 0 and 1 + n_eff*effect_var > 0")
    log_null = student_t_logpdf(t, dof)
    log_alt = location_scale_t_logpdf(t, dof, math.sqrt(n_eff) * prior.effect_mean, scale_sq)
    log_bf = log_null - log_alt
    bf = math.exp(log_bf)
    if not math.isfinite(bf) or bf <= 0.0:
        raise NumericalDomainError(f"bf01 left its domain: {bf}")
    posterior_odds = prior.prior_odds * bf
    return BfResult(
        bf01=bf,
        t_stat=t,
        dof=dof,
        n_eff=n_eff,
        decisive=bf <= threshold,
        post_prob_h0=posterior_odds / (1.0 + posterior_odds),
    )


def stop_decision(bf: BfResult, threshold: float = DECISIVE_THRESHOLD) -> bool:
    """Stop iff the evidence ratio is at or below the decisive threshold."""
    if bf.bf01 <= 0.0:
        raise ValueError("bf01 must be positive")
    return bf.bf01 <= threshold


def stop_index(
    trajectory: Sequence[Optional[BfResult]],
    budget: int,
    threshold: float = DECISIVE_THRESHOLD,
) -> tuple[int, bool]:
    """First patient index (1-based) with a decisive evidence ratio.

    Entries may be None while the statistic is not yet evaluable.
    Returns (budget, False) when the trajectory never turns decisive.
    """
    for i, bf in enumerate(trajectory, start=1):
        if bf is not None and stop_decision(bf, threshold):
            return i, True
    return budget, False
