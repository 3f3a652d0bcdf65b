"""Command-line entry point.

Subcommands: ``simulate`` (single-configuration batch), ``scenarios``
(the standard seven-scenario set), ``sweep`` (sensitivity grid),
``replay`` (verify an event log), ``serve`` (live-trial HTTP service).

Exit codes: 0 success, 1 replay mismatch, 2 usage error, 3 I/O failure,
4 numerical-domain failure.  Batch commands require --seed; no command
ever seeds from the clock.  A JSON config file (--config) mirrors the
flags one-to-one and CLI values override it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .allocation import WeightRule
from .errors import NumericalDomainError, ReplayMismatch
from .simulate import (
    DEFAULT_SCENARIOS,
    SweepGrid,
    _float_key,
    run_scenarios,
    run_sweep,
    stopping_table,
    trajectory_bands,
    trial_rng,
)
from .stopping import BfPrior
from .trial import make_trial_config, run_trial
from . import eventlog, outputs

SCENARIO_COLUMNS = (
    "label",
    "mean_difference",
    "sd",
    "budget",
    "rule",
    "n_sims",
    "mean_n_a",
    "mean_n_b",
    "selected_arm",
    "selected_mean_count",
    "mean_total_response",
)

SWEEP_COLUMNS = (
    "mu_b",
    "omega",
    "c_tb",
    "n_sims",
    "budget",
    "mean_prop_a",
    "mean_prop_b",
    "mean_frac_a",
    "mean_switch",
    "mean_crossing",
    "n_switched",
    "switch_q025",
    "switch_q50",
    "switch_q975",
    "stop_q025",
    "stop_q50",
    "stop_q975",
    "p_exhaust",
    "median_bf_at_budget",
    "mean_bf_at_budget",
)

STOPPING_COLUMNS = (
    "mu_b",
    "omega",
    "c_tb",
    "stop_q025",
    "stop_q50",
    "stop_q975",
    "p_exhaust",
    "median_bf_at_budget",
)

TRIAL_COLUMNS = (
    "trial",
    "n_a",
    "n_b",
    "n_records",
    "switch_index",
    "first_crossing",
    "n_stop",
    "stopped",
    "bf_at_end",
    "mean_w_a",
)


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlmtrial", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="batch-run one configuration")
    sim.add_argument("--config", type=Path, help="JSON file of flag defaults")
    sim.add_argument("--rule", choices=["zr", "bb"])
    sim.add_argument("--budget", type=int)
    sim.add_argument("--mu-a", type=float)
    sim.add_argument("--mu-b", type=float)
    sim.add_argument("--sd", type=float)
    sim.add_argument("--omega", type=float)
    sim.add_argument("--ctb", type=float)
    sim.add_argument("--cta", type=float)
    sim.add_argument("--v", type=float)
    sim.add_argument("--sims", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--bf-effect-mean", type=float)
    sim.add_argument("--bf-effect-var", type=float)
    sim.add_argument("--stop", dest="stop", action="store_true", default=None)
    sim.add_argument("--no-stop", dest="stop", action="store_false", default=None)
    sim.add_argument("--arms", choices=["shared", "independent"])
    sim.add_argument("--weight-scale", choices=["variance", "sd"])
    sim.add_argument("--logs", type=int, help="write event logs for the first N trials")
    sim.add_argument("--out", type=Path)

    sc = sub.add_parser("scenarios", help="run the standard scenario set")
    sc.add_argument("--config", type=Path)
    sc.add_argument(
        "--scenarios-file",
        type=Path,
        help="JSON list of {mean_difference, sd, budget, label} rows; default: the built-in seven",
    )
    sc.add_argument("--rule", choices=["zr", "bb", "both"])
    sc.add_argument("--sims", type=int)
    sc.add_argument("--seed", type=int)
    sc.add_argument("--omega", type=float)
    sc.add_argument("--cta", type=float)
    sc.add_argument("--ctb", type=float)
    sc.add_argument("--baseline", type=float)
    sc.add_argument("--v", type=float)
    sc.add_argument("--jobs", type=int)
    sc.add_argument("--out", type=Path)

    sw = sub.add_parser("sweep", help="run the sensitivity grid")
    sw.add_argument("--config", type=Path)
    sw.add_argument("--mu-b", type=_float_list, help="comma list, default 1,2,3,4,5")
    sw.add_argument("--omega", type=_float_list, help="comma list, default 0.1,0.01,0.001")
    sw.add_argument("--ctb", type=_float_list, help="comma list, default 0.1,0.001,0.000001")
    sw.add_argument("--cta", type=float, help="default: equal to each cell's ctb")
    sw.add_argument("--budget", type=int)
    sw.add_argument("--sims", type=int)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--bf-effect-mean", type=float)
    sw.add_argument("--bf-effect-var", type=float)
    sw.add_argument("--arms", choices=["shared", "independent"])
    sw.add_argument("--weight-scale", choices=["variance", "sd"])
    sw.add_argument("--jobs", type=int)
    sw.add_argument("--out", type=Path)

    rp = sub.add_parser("replay", help="verify an event log reproduces its trajectory")
    rp.add_argument("logfile", type=Path)
    rp.add_argument("--quiet", action="store_true")

    sv = sub.add_parser("serve", help="start the live-trial HTTP service")
    sv.add_argument("--addr", default="127.0.0.1:8710")
    sv.add_argument("--data-dir", type=Path, required=True)

    return parser


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """Fallback chain per parameter: CLI flag, config file, built-in."""
    file_values = {}
    config_path = getattr(args, "config", None)
    if config_path is not None:
        file_values = json.loads(Path(config_path).read_text(encoding="utf-8"))
        unknown = set(file_values) - set(defaults)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    resolved = {}
    for key, built_in in defaults.items():
        cli_value = getattr(args, key.replace("-", "_"), None)
        if cli_value is not None:
            resolved[key] = cli_value
        elif key in file_values:
            value = file_values[key]
            resolved[key] = tuple(value) if isinstance(value, list) else value
        else:
            resolved[key] = built_in
    return resolved


def _require(resolved: dict, keys: tuple[str, ...], command: str) -> None:
    missing = [k for k in keys if resolved[k] is None]
    if missing:
        raise UsageError(f"{command} requires --{missing[0].replace('_', '-')}")


class UsageError(Exception):
    pass


def _echo_parameters(resolved: dict) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else (str(v) if isinstance(v, Path) else v))
            for k, v in resolved.items()}


def cmd_simulate(args: argparse.Namespace) -> int:
    p = _resolve(
        args,
        {
            "rule": "bb",
            "budget": 100,
            "mu_a": 0.0,
            "mu_b": 0.0,
            "sd": 1.0,
            "omega": 0.1,
            "ctb": 0.000001,
            "cta": 1.0,
            "v": None,
            "sims": 1000,
            "seed": None,
            "bf_effect_mean": 0.0,
            "bf_effect_var": 2.0,
            "stop": True,
            "arms": "shared",
            "weight_scale": "variance",
            "logs": 1,
            "out": None,
        },
    )
    _require(p, ("seed", "out"), "simulate")
    v = p["v"] if p["v"] is not None else 1.0
    config = make_trial_config(
        budget=p["budget"],
        rule=p["rule"],
        omega=p["omega"],
        c_ta=p["cta"],
        c_tb=p["ctb"],
        v=v,
        mu_a=p["mu_a"],
        mu_b=p["mu_b"],
        sigma=p["sd"],
        bf_prior=BfPrior(effect_mean=p["bf_effect_mean"], effect_var=p["bf_effect_var"]),
        seed=p["seed"],
        enforce_stop=p["stop"],
        independent_arms=p["arms"] == "independent",
        weight_scale=p["weight_scale"],
    )
    out_dir = Path(p["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    cell_key = (_float_key(p["mu_b"]), _float_key(p["sd"]), int(p["budget"]))

    rows = []
    paths = []
    written_logs = []
    for i in range(p["sims"]):
        res = run_trial(config, trial_rng(p["seed"], cell_key, i))
        rows.append(
            {
                "trial": i,
                "n_a": res.n_a,
                "n_b": res.n_b,
                "n_records": len(res.records),
                "switch_index": res.switch_index,
                "first_crossing": res.first_crossing,
                "n_stop": res.n_stop,
                "stopped": res.stopped,
                "bf_at_end": None if res.final_bf is None else res.final_bf.bf01,
                "mean_w_a": float(np.mean([r.w_a for r in res.records])),
            }
        )
        paths.append([r.w_a for r in res.records])
        if i < p["logs"]:
            name = f"logs/trial_{i:05d}.log"
            eventlog.write(out_dir / name, config, res.records)
            written_logs.append(name)

    outputs.write_csv(out_dir / "trials.csv", rows, TRIAL_COLUMNS)
    mean, lo, hi = trajectory_bands(paths, p["budget"])
    n_stop = np.array([r["n_stop"] for r in rows], dtype=float)
    summary = {
        "schema_version": outputs.SCHEMA_VERSION,
        "n_sims": p["sims"],
        "budget": p["budget"],
        "mean_n_a": float(np.mean([r["n_a"] for r in rows])),
        "mean_n_b": float(np.mean([r["n_b"] for r in rows])),
        "p_exhaust": float(np.mean(n_stop >= p["budget"])),
        "stop_quantiles": list(np.quantile(n_stop, (0.025, 0.5, 0.975), method="linear")),
        "band_mean": list(mean),
        "band_q025": list(lo),
        "band_q975": list(hi),
        "band_padding": "stopped trials carry their last weight to the budget",
    }
    outputs.write_json(out_dir / "summary.json", summary)
    outputs.write_manifest(
        out_dir, "simulate", _echo_parameters(p), p["seed"],
        ["trials.csv", "summary.json", *written_logs],
    )
    print(f"simulate: wrote {p['sims']} trials to {out_dir}")
    return 0


def cmd_scenarios(args: argparse.Namespace) -> int:
    p = _resolve(
        args,
        {
            "scenarios_file": None,
            "rule": "both",
            "sims": 1000,
            "seed": None,
            "omega": 0.1,
            "cta": 1.0,
            "ctb": 1.0,
            "baseline": 100.0,
            "v": 1.0,
            "jobs": 1,
            "out": None,
        },
    )
    _require(p, ("seed", "out"), "scenarios")
    scenarios = DEFAULT_SCENARIOS
    if p["scenarios_file"] is not None:
        from .simulate import ScenarioSpec

        raw = json.loads(Path(p["scenarios_file"]).read_text(encoding="utf-8"))
        scenarios = tuple(
            ScenarioSpec(
                mean_difference=float(row["mean_difference"]),
                sd=float(row["sd"]),
                budget=int(row["budget"]),
                label=str(row.get("label", f"S{i + 1}")),
            )
            for i, row in enumerate(raw)
        )
    rules = [WeightRule.ZHANG_ROSENBERGER, WeightRule.BISWAS_BHATTACHARYA]
    if p["rule"] != "both":
        rules = [WeightRule(p["rule"])]
    rows = []
    for rule in rules:
        for res in run_scenarios(
            scenarios, rule, p["sims"], p["seed"],
            omega=p["omega"], c_ta=p["cta"], c_tb=p["ctb"],
            baseline=p["baseline"], v=p["v"], jobs=p["jobs"],
        ):
            rows.append(res.row())
    out_dir = Path(p["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs.write_csv(out_dir / "scenario_summary.csv", rows, SCENARIO_COLUMNS)
    outputs.write_manifest(out_dir, "scenarios", _echo_parameters(p), p["seed"], ["scenario_summary.csv"])
    print(f"scenarios: wrote {len(rows)} rows to {out_dir}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    p = _resolve(
        args,
        {
            "mu_b": (1.0, 2.0, 3.0, 4.0, 5.0),
            "omega": (0.1, 0.01, 0.001),
            "ctb": (0.1, 0.001, 0.000001),
            "cta": None,
            "budget": 100,
            "sims": 1000,
            "seed": None,
            "bf_effect_mean": 0.0,
            "bf_effect_var": 2.0,
            "arms": "independent",
            "weight_scale": "sd",
            "jobs": 1,
            "out": None,
        },
    )
    _require(p, ("seed", "out"), "sweep")
    grid = SweepGrid(
        mu_b_values=tuple(p["mu_b"]),
        omega_values=tuple(p["omega"]),
        c_tb_values=tuple(p["ctb"]),
        budget=p["budget"],
        n_sims=p["sims"],
        c_ta=p["cta"],
        bf_prior=BfPrior(effect_mean=p["bf_effect_mean"], effect_var=p["bf_effect_var"]),
        independent_arms=p["arms"] == "independent",
        weight_scale=p["weight_scale"],
    )
    summaries = run_sweep(grid, p["seed"], jobs=p["jobs"])
    out_dir = Path(p["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs.write_csv(out_dir / "sweep_summary.csv", [s.row() for s in summaries], SWEEP_COLUMNS)
    outputs.write_csv(
        out_dir / "stopping_table.csv", [r.row() for r in stopping_table(summaries)], STOPPING_COLUMNS
    )
    bands = {
        "schema_version": outputs.SCHEMA_VERSION,
        "budget": grid.budget,
        "padding": "stopped trials carry their last weight to the budget",
        "cells": [
            {
                "mu_b": s.mu_b,
                "omega": s.omega,
                "c_tb": s.c_tb,
                "mean": list(s.band_mean),
                "q025": list(s.band_lo),
                "q975": list(s.band_hi),
            }
            for s in summaries
        ],
    }
    outputs.write_json(out_dir / "trajectory_bands.json", bands)
    outputs.write_manifest(
        out_dir, "sweep", _echo_parameters(p), p["seed"],
        ["sweep_summary.csv", "stopping_table.csv", "trajectory_bands.json"],
    )
    print(f"sweep: wrote {len(summaries)} cells to {out_dir}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    report = eventlog.replay_file(args.logfile)
    if not args.quiet:
        print(f"records: {report.n_records}")
        print(f"final t: {report.final_t}")
        print(f"final m: {report.final_state_m}")
        print(f"final C: {report.final_state_c}")
        bf = report.final_bf
        print(f"final bf01: {'' if bf is None else bf.bf01}")
    if report.ok:
        print("replay: state matches the recorded trajectory")
        return 0
    raise ReplayMismatch("; ".join(report.mismatches[:5]))


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.addr.rpartition(":")
    app = create_app(Path(args.data_dir))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


_COMMANDS = {
    "simulate": cmd_simulate,
    "scenarios": cmd_scenarios,
    "sweep": cmd_sweep,
    "replay": cmd_replay,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except NumericalDomainError as exc:
        print(f"error: numerical-domain: {exc}", file=sys.stderr)
        return 4
    except ReplayMismatch as exc:
        print(f"error: replay-mismatch: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
