"""Calibration search for the evidence-ratio prior (effect_mean, effect_var).

The stopping-table reference values pin, for the grid cells checked by the
acceptance suite:

  * mu_b=3, omega=0.1, c_tb=1e-6  -> stop quantiles (28, 37, 54), P(N>=100) = 0.002
  * mu_b=1, omega=0.001, any c_tb -> stop quantiles (100, 100, 100), P(N>=100) = 1.000

The prior behind those values is not recorded anywhere, so this script
measures what every prior on a wide grid actually produces.  Trials are
simulated once per cell with the calibrated allocation engine; the
(t, dof, n_eff) trajectory per trial is kept so each candidate prior is
scored by rescanning the trajectories (no re-simulation).

It also evaluates a forecast-gap probe: replacing the pooled two-sample t
with (f_B - f_A)/sqrt(Q_A + Q_B) from the stored forecasts, to document
how a filter-driven statistic behaves compared with the data-driven one.

Writes calibration/bf_prior_calibration.json and .md.

Usage: python3 scripts/calibrate_bf_prior.py [n_sims]
"""

import json
import math
import sys
from pathlib import Path

import numpy as np

from dlmtrial.allocation import Arm
from dlmtrial.errors import DegenerateSamples, InsufficientSamples
from dlmtrial.simulate import trial_rng, _float_key
from dlmtrial.stopping import ArmSamples, BfPrior, bf01, two_sample_t
from dlmtrial.trial import make_trial_config, run_trial

CELLS = {
    "mu3_omega0.1_ctb1e-06": dict(mu_b=3.0, omega=0.1, c_tb=1e-6),
    "mu1_omega0.001_ctb0.1": dict(mu_b=1.0, omega=0.001, c_tb=0.1),
    "mu1_omega0.001_ctb0.001": dict(mu_b=1.0, omega=0.001, c_tb=0.001),
    "mu1_omega0.001_ctb1e-06": dict(mu_b=1.0, omega=0.001, c_tb=1e-6),
}

TARGETS = {
    "mu3_omega0.1_ctb1e-06": dict(quantiles=(28, 37, 54), q_tol=5, p_exhaust_max=0.02),
    "mu1_omega0.001_ctb0.1": dict(quantiles=(100, 100, 100), q_tol=0, p_exhaust_min=0.98),
    "mu1_omega0.001_ctb0.001": dict(quantiles=(100, 100, 100), q_tol=0, p_exhaust_min=0.98),
    "mu1_omega0.001_ctb1e-06": dict(quantiles=(100, 100, 100), q_tol=0, p_exhaust_min=0.98),
}

EFFECT_MEANS = (0.0, -0.5, 0.5, -1.0, 1.0)
EFFECT_VARS = (0.001, 0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0, 1000.0)
BUDGET = 100
SEED = 20250810


def t_trajectories(mu_b, omega, c_tb, n_sims):
    """Per-trial arrays of (t, dof, n_eff, t_gap) per patient; NaN while
    the statistic is not evaluable.  t_gap standardizes the forecast gap."""
    config = make_trial_config(
        budget=BUDGET, rule="bb", omega=omega, c_ta=c_tb, c_tb=c_tb, v=1.0,
        mu_a=0.0, mu_b=mu_b, sigma=1.0, seed=SEED, enforce_stop=False,
        independent_arms=True, weight_scale="sd", evolution="per_arm",
    )
    cell_key = (_float_key(mu_b), _float_key(omega), _float_key(c_tb))
    out = []
    for i in range(n_sims):
        res = run_trial(config, trial_rng(SEED, cell_key, i))
        stats = {"A": [0, 0.0, 0.0], "B": [0, 0.0, 0.0]}  # n, mean, m2
        rows = np.full((BUDGET, 4), np.nan)
        for j, rec in enumerate(res.records):
            s = stats[rec.arm.value]
            s[0] += 1
            delta = rec.y - s[1]
            s[1] += delta / s[0]
            s[2] += delta * (rec.y - s[1])
            try:
                t, dof, n_eff = two_sample_t(
                    ArmSamples(
                        n_a=stats["A"][0], n_b=stats["B"][0],
                        mean_a=stats["A"][1], mean_b=stats["B"][1],
                        ss_a=stats["A"][2], ss_b=stats["B"][2],
                    )
                )
                rows[j, 0:3] = (t, dof, n_eff)
            except (InsufficientSamples, DegenerateSamples):
                pass
            rows[j, 3] = (rec.f_b - rec.f_a) / math.sqrt(rec.q_a + rec.q_b)
        out.append(rows)
    return out


def stop_stats(trajectories, prior, use_gap=False):
    stops = []
    for rows in trajectories:
        n_stop = BUDGET
        for j in range(BUDGET):
            t, dof, n_eff, t_gap = rows[j]
            if math.isnan(dof):
                continue
            stat = t_gap if use_gap else t
            if bf01(stat, dof, n_eff, prior).bf01 <= 0.01:
                n_stop = j + 1
                break
        stops.append(n_stop)
    stops = np.asarray(stops, dtype=float)
    q = np.quantile(stops, (0.025, 0.5, 0.975), method="linear")
    return tuple(round(float(x), 3) for x in q), float(np.mean(stops >= BUDGET))


def meets(cell, quantiles, p_exhaust):
    tgt = TARGETS[cell]
    q_ok = all(abs(q - ref) <= tgt["q_tol"] for q, ref in zip(quantiles, tgt["quantiles"]))
    if "p_exhaust_max" in tgt:
        return q_ok and p_exhaust <= tgt["p_exhaust_max"]
    return q_ok and p_exhaust >= tgt["p_exhaust_min"]


def main():
    n_sims = int(sys.argv[1]) if len(sys.argv) > 1 else 400
    print(f"simulating {len(CELLS)} cells x {n_sims} trials ...")
    trajectories = {name: t_trajectories(**params, n_sims=n_sims) for name, params in CELLS.items()}

    results = []
    passing = []
    for lam in EFFECT_MEANS:
        for var in EFFECT_VARS:
            prior = BfPrior(effect_mean=lam, effect_var=var)
            per_cell = {}
            for name in CELLS:
                quantiles, p_exhaust = stop_stats(trajectories[name], prior)
                per_cell[name] = {
                    "stop_quantiles": quantiles,
                    "p_exhaust": round(p_exhaust, 4),
                    "meets_target": meets(name, quantiles, p_exhaust),
                }
            ok = all(c["meets_target"] for c in per_cell.values())
            results.append(
                {"effect_mean": lam, "effect_var": var, "cells": per_cell, "meets_all": ok}
            )
            if ok:
                passing.append((lam, var))

    default_prior = BfPrior()
    default_rows = {
        name: stop_stats(trajectories[name], default_prior) for name in CELLS
    }
    gap_rows = {name: stop_stats(trajectories[name], default_prior, use_gap=True) for name in CELLS}

    conclusion = (
        "no prior on the searched grid reproduces the reference stopping table: "
        "the pooled two-sample t statistic at the budget has nearly the same "
        "distribution for omega=0.1 and omega=0.001 (the raw outcomes do not "
        "depend on the filter's evolution variance), so no single prior can "
        "make the mu_b=3/omega=0.1 cell stop around patient 37 while leaving "
        "the mu_b=1/omega=0.001 cells unstopped at the budget."
        if not passing
        else f"priors reproducing the reference table: {passing}"
    )

    payload = {
        "n_sims": n_sims,
        "seed": SEED,
        "budget": BUDGET,
        "targets": {k: {**v} for k, v in TARGETS.items()},
        "prior_grid": {"effect_mean": EFFECT_MEANS, "effect_var": EFFECT_VARS},
        "n_priors_searched": len(results),
        "default_prior": {
            "effect_mean": 0.0,
            "effect_var": 2.0,
            "cells": {
                name: {"stop_quantiles": q, "p_exhaust": p}
                for name, (q, p) in default_rows.items()
            },
        },
        "forecast_gap_probe": {
            "statistic": "(f_B - f_A)/sqrt(Q_A + Q_B) under the default prior",
            "cells": {
                name: {"stop_quantiles": q, "p_exhaust": p} for name, (q, p) in gap_rows.items()
            },
        },
        "results": results,
        "passing_priors": passing,
        "conclusion": conclusion,
    }
    out_dir = Path(__file__).resolve().parent.parent / "calibration"
    out_dir.mkdir(exist_ok=True)
    with open(out_dir / "bf_prior_calibration.json", "w") as fp:
        json.dump(payload, fp, indent=1)

    lines = [
        "# Evidence-ratio prior calibration",
        "",
        f"{len(results)} priors searched over effect_mean x effect_var = "
        f"{EFFECT_MEANS} x {EFFECT_VARS}, scored on {n_sims} trials per cell "
        f"(seed {SEED}).",
        "",
        "## Reference targets",
        "",
        "| cell | stop quantiles | P(N >= 100) |",
        "| --- | --- | --- |",
    ]
    for name, tgt in TARGETS.items():
        bound = (
            f"<= {tgt['p_exhaust_max']}" if "p_exhaust_max" in tgt else f">= {tgt['p_exhaust_min']}"
        )
        lines.append(f"| {name} | {tgt['quantiles']} +/- {tgt['q_tol']} | {bound} |")
    lines += [
        "",
        "## Default prior (effect_mean=0, effect_var=2)",
        "",
        "| cell | stop quantiles | P(N >= 100) |",
        "| --- | --- | --- |",
    ]
    for name, (q, p) in default_rows.items():
        lines.append(f"| {name} | {q} | {p:.3f} |")
    lines += [
        "",
        "## Forecast-gap probe (default prior)",
        "",
        "| cell | stop quantiles | P(N >= 100) |",
        "| --- | --- | --- |",
    ]
    for name, (q, p) in gap_rows.items():
        lines.append(f"| {name} | {q} | {p:.3f} |")
    lines += ["", "## Conclusion", "", conclusion, ""]
    (out_dir / "bf_prior_calibration.md").write_text("\n".join(lines))
    print(f"searched {len(results)} priors; passing: {passing or 'none'}")
    print(f"wrote {out_dir / 'bf_prior_calibration.json'}")


if __name__ == "__main__":
    main()
