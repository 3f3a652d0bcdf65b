import math

import mpmath
import numpy as np
import pytest

from dlmtrial.allocation import (
    Arm,
    ArmForecasts,
    draw_arm,
    std_normal_cdf,
    weights_bb,
    weights_zr,
)
from dlmtrial.errors import NumericalDomainError


def test_cdf_at_zero():
    assert std_normal_cdf(0.0) == 0.5


def test_cdf_at_upper_975_quantile():
    assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)


def test_cdf_reflection_identity():
    rng = np.random.default_rng(3)
    for x in rng.normal(scale=3.0, size=200):
        assert abs(std_normal_cdf(x) + std_normal_cdf(-x) - 1.0) <= 1e-14


def test_cdf_against_high_precision_oracle():
    with mpmath.workdps(40):
        for x in np.linspace(-8.0, 8.0, 161):
            expected = float(mpmath.ncdf(mpmath.mpf(float(x))))
            assert abs(std_normal_cdf(float(x)) - expected) <= 1e-12


def test_cdf_rejects_non_finite():
    with pytest.raises(NumericalDomainError):
        std_normal_cdf(float("nan"))


def test_zr_tie_goes_even():
    for q in (0.2, 1.0, 7.0):
        w = weights_zr(ArmForecasts(f_a=3.0, f_b=3.0, q_a=q, q_b=2 * q))
        assert w.w_a == 0.5 and w.branch == "tie"


def test_zr_hand_case_exact():
    w = weights_zr(ArmForecasts(f_a=4.0, f_b=9.0, q_a=1.0, q_b=1.0))
    assert w.w_a == 0.6
    assert w.w_b == 0.4
    assert w.branch == "a_lower"


def test_zr_mirror_case():
    w = weights_zr(ArmForecasts(f_a=9.0, f_b=4.0, q_a=1.0, q_b=1.0))
    assert w.w_a == pytest.approx(0.4, abs=1e-15)
    assert w.branch == "b_lower"


def test_zr_nonpositive_forecast_guard():
    w = weights_zr(ArmForecasts(f_a=-1.0, f_b=4.0, q_a=1.0, q_b=1.0))
    assert w.w_a == 0.5 and w.branch == "nonpositive_forecast"
    w = weights_zr(ArmForecasts(f_a=4.0, f_b=0.0, q_a=1.0, q_b=1.0))
    assert w.w_a == 0.5 and w.branch == "nonpositive_forecast"


def test_zr_mismatched_ordering_falls_back_to_even():
    # f_a < f_b but the ratio is < 1 because q_b dominates: no branch fires.
    w = weights_zr(ArmForecasts(f_a=4.0, f_b=9.0, q_a=1.0, q_b=10.0))
    assert w.w_a == 0.5 and w.branch == "tie"


def test_bb_full_symmetry_is_exact():
    w = weights_bb(ArmForecasts(f_a=2.0, f_b=2.0, q_a=1.3, q_b=1.3))
    assert w.w_a == 0.5
    assert w.gamma_a == 0.5 and w.gamma_b == 0.5


def test_bb_hand_case():
    w = weights_bb(ArmForecasts(f_a=1.0, f_b=2.0, q_a=1.0, q_b=1.0))
    assert w.w_a == pytest.approx(0.6404, abs=1e-4)
    assert w.gamma_a == pytest.approx(0.23975, abs=1e-5)
    assert w.gamma_b == pytest.approx(0.76025, abs=1e-5)


def test_bb_matches_high_precision_assembly():
    with mpmath.workdps(40):
        for f_a, f_b, q_a, q_b in [(1.0, 2.0, 1.0, 1.0), (0.3, -1.2, 0.7, 2.5), (5.0, 5.5, 2.0, 0.4)]:
            z = (mpmath.mpf(f_a) - f_b) / mpmath.sqrt(mpmath.mpf(q_a) ** 2 + mpmath.mpf(q_b) ** 2)
            ga, gb = mpmath.ncdf(z), mpmath.ncdf(-z)
            num = q_a * mpmath.sqrt(gb)
            expected = float(num / (num + q_b * mpmath.sqrt(ga)))
            got = weights_bb(ArmForecasts(f_a=f_a, f_b=f_b, q_a=q_a, q_b=q_b)).w_a
            assert abs(got - expected) <= 1e-12


def test_bb_label_exchange_symmetry():
    rng = np.random.default_rng(11)
    for _ in range(300):
        fc = ArmForecasts(
            f_a=rng.normal(scale=3),
            f_b=rng.normal(scale=3),
            q_a=rng.uniform(0.1, 5),
            q_b=rng.uniform(0.1, 5),
        )
        w = weights_bb(fc)
        w_swapped = weights_bb(fc.swapped())
        assert abs(w_swapped.w_a - w.w_b) <= 1e-15


def test_bb_monotone_in_forecast_gap():
    prev = None
    for f_a in np.linspace(-4.0, 4.0, 81):
        w = weights_bb(ArmForecasts(f_a=float(f_a), f_b=0.0, q_a=1.0, q_b=1.0)).w_a
        if prev is not None:
            assert w <= prev + 1e-15
        prev = w


def test_both_rules_stay_in_unit_interval():
    rng = np.random.default_rng(23)
    for _ in range(500):
        fc = ArmForecasts(
            f_a=rng.normal(scale=50),
            f_b=rng.normal(scale=50),
            q_a=rng.uniform(0.01, 100),
            q_b=rng.uniform(0.01, 100),
        )
        assert 0.0 <= weights_bb(fc).w_a <= 1.0
        assert 0.0 <= weights_zr(fc).w_a <= 1.0


def test_bb_ratio_invariant_under_common_scale_with_gammas_fixed():
    # The q/sqrt(gamma) ratio is homogeneous of degree zero in (q_a, q_b).
    gamma_a = std_normal_cdf(-0.8)
    gamma_b = std_normal_cdf(0.8)

    def ratio(q_a, q_b):
        num = q_a * math.sqrt(gamma_b)
        return num / (num + q_b * math.sqrt(gamma_a))

    base = ratio(1.7, 0.6)
    for c in (1e-3, 0.5, 3.0, 1e4):
        assert ratio(1.7 * c, 0.6 * c) == pytest.approx(base, abs=1e-15)


def test_draw_degenerate_weights():
    all_a = weights_bb(ArmForecasts(f_a=-40.0, f_b=40.0, q_a=1.0, q_b=1.0))
    assert all_a.w_a == 1.0
    for u in (0.0, 0.5, 0.999999):
        assert draw_arm(all_a, u) is Arm.A
    all_b = weights_bb(ArmForecasts(f_a=40.0, f_b=-40.0, q_a=1.0, q_b=1.0))
    assert all_b.w_a == 0.0
    for u in (0.0, 0.5, 0.999999):
        assert draw_arm(all_b, u) is Arm.B


def test_draw_frequency_matches_weight():
    w = weights_zr(ArmForecasts(f_a=16.0, f_b=81.0, q_a=3.0, q_b=1.0))
    assert w.w_a == pytest.approx(27.0 / 31.0, abs=1e-15)
    target = 0.75
    w = type(w)(w_a=target, w_b=1 - target, branch="test")
    rng = np.random.default_rng(1234)
    hits = sum(draw_arm(w, u) is Arm.A for u in rng.random(1_000_000))
    assert abs(hits / 1_000_000 - target) < 0.002


def test_draw_rejects_u_outside_half_open_interval():
    w = weights_bb(ArmForecasts(f_a=0.0, f_b=0.0, q_a=1.0, q_b=1.0))
    with pytest.raises(ValueError):
        draw_arm(w, 1.0)
    with pytest.raises(ValueError):
        draw_arm(w, -0.1)


def test_forecast_validation():
    with pytest.raises(NumericalDomainError):
        ArmForecasts(f_a=0.0, f_b=0.0, q_a=0.0, q_b=1.0)
    with pytest.raises(NumericalDomainError):
        ArmForecasts(f_a=float("inf"), f_b=0.0, q_a=1.0, q_b=1.0)
