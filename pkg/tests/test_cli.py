import json
from pathlib import Path

import pytest

from dlmtrial import outputs
from dlmtrial.cli import main


def run_cli(*args):
    return main([str(a) for a in args])


def test_simulate_writes_everything_and_replays(tmp_path, capsys):
    out = tmp_path / "run"
    code = run_cli(
        "simulate", "--rule", "bb", "--budget", "25", "--mu-b", "2", "--sd", "1",
        "--omega", "0.1", "--ctb", "0.000001", "--sims", "5", "--seed", "31",
        "--no-stop", "--logs", "2", "--out", out,
    )
    assert code == 0
    assert (out / "trials.csv").exists()
    assert (out / "summary.json").exists()
    assert (out / "manifest.json").exists()
    log = out / "logs" / "trial_00000.log"
    assert log.exists()

    rows = outputs.read_csv(out / "trials.csv")
    assert len(rows) == 5
    assert {"trial", "n_a", "n_b", "n_stop", "stopped"} <= set(rows[0])

    code = run_cli("replay", log)
    assert code == 0
    assert "matches" in capsys.readouterr().out


def test_replay_mismatch_exits_one(tmp_path, capsys):
    out = tmp_path / "run"
    run_cli(
        "simulate", "--budget", "20", "--mu-b", "1", "--omega", "0.1",
        "--ctb", "0.001", "--sims", "1", "--seed", "5", "--out", out,
    )
    log = out / "logs" / "trial_00000.log"
    lines = log.read_text().splitlines()
    parts = lines[4].split(",")
    parts[3] = "1e99" if parts[3] != "1e99" else "2e99"
    lines[4] = ",".join(parts)
    log.write_text("\n".join(lines) + "\n")
    assert run_cli("replay", log) == 1
    assert "replay-mismatch" in capsys.readouterr().err


def test_scenarios_byte_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run_cli("scenarios", "--rule", "zr", "--sims", "3", "--seed", "42", "--out", out) == 0
    assert (a / "scenario_summary.csv").read_bytes() == (b / "scenario_summary.csv").read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["outputs"] == mb["outputs"]
    pa = {k: v for k, v in ma["parameters"].items() if k != "out"}
    pb = {k: v for k, v in mb["parameters"].items() if k != "out"}
    assert pa == pb
    rows = outputs.read_csv(a / "scenario_summary.csv")
    assert len(rows) == 7


def test_sweep_outputs_and_parallel_determinism(tmp_path):
    base = [
        "sweep", "--mu-b", "1,5", "--omega", "0.1", "--ctb", "0.000001",
        "--sims", "8", "--budget", "30", "--seed", "77",
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(*base, "--jobs", "1", "--out", a) == 0
    assert run_cli(*base, "--jobs", "2", "--out", b) == 0
    for name in ("sweep_summary.csv", "stopping_table.csv", "trajectory_bands.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rows = outputs.read_csv(a / "sweep_summary.csv")
    assert len(rows) == 2
    bands = json.loads((a / "trajectory_bands.json").read_text())
    assert len(bands["cells"]) == 2
    assert len(bands["cells"][0]["mean"]) == 30


def test_scenarios_accepts_definition_file(tmp_path):
    rows = [
        {"mean_difference": 0.0, "sd": 5.0, "budget": 12, "label": "tiny-null"},
        {"mean_difference": 3.0, "sd": 5.0, "budget": 16},
    ]
    spec_file = tmp_path / "scenarios.json"
    spec_file.write_text(json.dumps(rows))
    out = tmp_path / "out"
    code = run_cli(
        "scenarios", "--scenarios-file", spec_file, "--rule", "bb",
        "--sims", "3", "--seed", "9", "--out", out,
    )
    assert code == 0
    parsed = outputs.read_csv(out / "scenario_summary.csv")
    assert [r["label"] for r in parsed] == ["tiny-null", "S2"]
    assert parsed[0]["budget"] == 12


def test_missing_seed_is_usage_error(tmp_path, capsys):
    assert run_cli("scenarios", "--sims", "2", "--out", tmp_path / "x") == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_exits_two(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        run_cli("simulate", "--bogus", "1")
    assert excinfo.value.code == 2


def test_config_file_provides_defaults_and_cli_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sims": 4, "seed": 13, "rule": "zr", "budget": 15, "mu_b": 1.0}))
    out = tmp_path / "out"
    assert run_cli("simulate", "--config", cfg, "--sims", "2", "--ctb", "0.001", "--out", out) == 0
    rows = outputs.read_csv(out / "trials.csv")
    assert len(rows) == 2  # CLI --sims overrides the file value
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["parameters"]["budget"] == 15
    assert manifest["parameters"]["rule"] == "zr"
    assert manifest["parameters"]["sims"] == 2


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 1, "nonsense": True}))
    assert run_cli("simulate", "--config", cfg, "--out", tmp_path / "o") == 2


def test_io_failure_exits_three(tmp_path, capsys):
    blocker = tmp_path / "blocked"
    blocker.write_text("a file, not a directory")
    code = run_cli(
        "simulate", "--budget", "5", "--sims", "1", "--seed", "1",
        "--ctb", "0.001", "--out", blocker,
    )
    assert code == 3
    assert "io" in capsys.readouterr().err


def test_manifest_digests_cover_written_files(tmp_path):
    out = tmp_path / "m"
    run_cli(
        "simulate", "--budget", "10", "--mu-b", "1", "--omega", "0.1",
        "--ctb", "0.001", "--sims", "2", "--seed", "3", "--out", out,
    )
    manifest = json.loads((out / "manifest.json").read_text())
    for name, digest in manifest["outputs"].items():
        assert outputs.sha256_file(out / name) == digest
    assert manifest["master_seed"] == 3


def test_csv_round_trip_through_own_parser(tmp_path):
    rows = [
        {"a": 1, "b": 0.1, "c": None, "d": "text", "e": True},
        {"a": -2, "b": 1e-300, "c": 3.5, "d": "x", "e": False},
    ]
    path = tmp_path / "t.csv"
    outputs.write_csv(path, rows, ("a", "b", "c", "d", "e"))
    parsed = outputs.read_csv(path)
    assert parsed == rows
