"""Randomization weights from the two arms' predictive distributions.

Two published rules are supported.  Both prefer the arm with the lower
predicted mean and use the predictive variances as scale factors:

* ``weights_zr`` -- ratio rule on square-rooted forecast means.  Undefined
  for non-positive forecasts, so those inputs fall back to 1/2 with a
  diagnostics flag.
* ``weights_bb`` -- smooth rule through the normal CDF of the standardized
  forecast gap; well-defined for all finite forecasts.

Randomness is injected as an explicit uniform draw; this module owns no
generator.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import NumericalDomainError

_SQRT2 = math.sqrt(2.0)


class Arm(enum.Enum):
    A = "A"
    B = "B"


class WeightRule(enum.Enum):
    ZHANG_ROSENBERGER = "zr"
    BISWAS_BHATTACHARYA = "bb"


@dataclass(frozen=True)
class ArmForecasts:
    """Predictive means and variances for both arms."""

    f_a: float
    f_b: float
    q_a: float
    q_b: float

    def __post_init__(self):
        for name in ("f_a", "f_b", "q_a", "q_b"):
            if not math.isfinite(getattr(self, name)):
                raise NumericalDomainError(f"{name} must be finite")
        if self.q_a <= 0.0 or self.q_b <= 0.0:
            raise NumericalDomainError("predictive variances must be positive")

    def swapped(self) -> "ArmForecasts":
        return ArmForecasts(f_a=self.f_b, f_b=self.f_a, q_a=self.q_b, q_b=self.q_a)


@dataclass(frozen=True)
class AllocationWeights:
    """Randomization probabilities; w_b is always 1 - w_a.

    ``branch`` tags which case of the rule produced the value;
    ``gamma_a``/``gamma_b`` are set by the smooth rule only.
    """

    w_a: float
    w_b: float
    branch: str
    gamma_a: float | None = None
    gamma_b: float | None = None


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    if not math.isfinite(x):
        raise NumericalDomainError(f"x must be finite, got {x}")
    return 0.5 * math.erfc(-x / _SQRT2)


def weights_zr(fc: ArmForecasts) -> AllocationWeights:
    """Ratio rule: w_a = Q_a sqrt(f_b) / (Q_a sqrt(f_b) + Q_b sqrt(f_a))
    when the forecast ordering and the ratio agree, else 1/2.

    Non-positive forecasts make the square roots meaningless; those
    return 1/2 flagged ``nonpositive_forecast``.
    """
    if fc.f_a <= 0.0 or fc.f_b <= 0.0:
        return AllocationWeights(0.5, 0.5, branch="nonpositive_forecast")
    num = fc.q_a * math.sqrt(fc.f_b)
    den = fc.q_b * math.sqrt(fc.f_a)
    rho = num / (num + den)
    ratio = num / den
    if fc.f_a < fc.f_b and ratio > 1.0:
        return AllocationWeights(rho, 1.0 - rho, branch="a_lower")
    if fc.f_a > fc.f_b and ratio < 1.0:
        return AllocationWeights(rho, 1.0 - rho, branch="b_lower")
    return AllocationWeights(0.5, 0.5, branch="tie")


def weights_bb(fc: ArmForecasts) -> AllocationWeights:
    """Smooth rule: standardize the forecast gap, weigh by the normal CDF.

    gamma_a = Phi((f_a - f_b)/sqrt(q_a^2 + q_b^2)), gamma_b its mirror,
    w_a = q_a sqrt(gamma_b) / (q_a sqrt(gamma_b) + q_b sqrt(gamma_a)).
    """
    scale = math.hypot(fc.q_a, fc.q_b)
    z = (fc.f_a - fc.f_b) / scale
    gamma_a = std_normal_cdf(z)
    gamma_b = std_normal_cdf(-z)
    num = fc.q_a * math.sqrt(gamma_b)
    den = fc.q_b * math.sqrt(gamma_a)
    if num + den == 0.0:
        raise NumericalDomainError("weight denominator underflowed to zero")
    w_a = num / (num + den)
    return AllocationWeights(w_a, 1.0 - w_a, branch="smooth", gamma_a=gamma_a, gamma_b=gamma_b)


def weights_for(rule: WeightRule, fc: ArmForecasts) -> AllocationWeights:
    if rule is WeightRule.ZHANG_ROSENBERGER:
        return weights_zr(fc)
    return weights_bb(fc)


def draw_arm(w: AllocationWeights, u: float) -> Arm:
    """Inverse-CDF draw: arm A with probability w_a.  Requires u in [0, 1)."""
    if not (0.0 <= u < 1.0):
        raise ValueError(f"u must lie in [0, 1), got {u}")
    return Arm.A if u < w.w_a else Arm.B
