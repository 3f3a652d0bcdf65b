import numpy as np
import pytest

from dlmtrial import eventlog
from dlmtrial.errors import ReplayMismatch
from dlmtrial.trial import LiveSession, make_trial_config, run_trial


def config(**overrides):
    base = dict(
        budget=25, rule="bb", omega=0.1, c_ta=1.0, c_tb=1e-6, v=1.0,
        mu_a=0.0, mu_b=1.5, sigma=1.0, seed=42, enforce_stop=False,
    )
    base.update(overrides)
    return make_trial_config(**base)


def test_float_format_round_trips_exactly():
    rng = np.random.default_rng(8)
    values = list(rng.normal(scale=1e6, size=200)) + [0.1, 1e-300, 2**-52, 3.141592653589793]
    for x in values:
        assert float(eventlog.format_float(float(x))) == float(x)
    assert eventlog.format_float(None) == ""


def test_log_round_trip_is_lossless():
    cfg = config()
    res = run_trial(cfg)
    text = eventlog.dumps(cfg, res.records)
    parsed_cfg, parsed_records = eventlog.loads(text)
    assert parsed_cfg.canonical_json() == cfg.without_truth().canonical_json() or (
        parsed_cfg.canonical_json() == cfg.canonical_json()
    )
    assert len(parsed_records) == len(res.records)
    for a, b in zip(parsed_records, res.records):
        assert (a.t, a.arm, a.u, a.y, a.w_a, a.f_a, a.q_a, a.f_b, a.q_b, a.bf01) == (
            b.t, b.arm, b.u, b.y, b.w_a, b.f_a, b.q_a, b.f_b, b.q_b, b.bf01
        )
    assert eventlog.dumps(parsed_cfg, parsed_records) == text


def test_replay_reproduces_simulated_trial_exactly():
    cfg = config(weight_scale="sd", seed=7)
    res = run_trial(cfg)
    text = eventlog.dumps(cfg, res.records)
    parsed_cfg, parsed_records = eventlog.loads(text)
    report = eventlog.replay(parsed_cfg, parsed_records)
    assert report.ok, report.mismatches
    assert report.final_t == res.final_state.t
    assert list(report.final_state_m) == res.final_state.m.tolist()
    assert [list(r) for r in report.final_state_c] == res.final_state.C.tolist()
    if res.final_bf is None:
        assert report.final_bf is None
    else:
        assert report.final_bf.bf01 == res.final_bf.bf01


def test_replay_detects_tampered_outcome(tmp_path):
    cfg = config()
    res = run_trial(cfg)
    path = tmp_path / "trial.log"
    eventlog.write(path, cfg, res.records)
    assert eventlog.verify_file(path).ok

    lines = path.read_text().splitlines()
    fields = lines[5].split(",")
    fields[3] = "%.17g" % (float(fields[3]) + 0.5)
    lines[5] = ",".join(fields)
    path.write_text("\n".join(lines) + "\n")
    report = eventlog.replay_file(path)
    assert not report.ok
    assert any("stored" in m for m in report.mismatches)
    with pytest.raises(ReplayMismatch):
        eventlog.verify_file(path)


def test_replay_covers_live_sessions_and_per_arm_mode():
    cfg = make_trial_config(
        budget=15, rule="bb", omega=0.01, c_ta=1e-6, c_tb=1e-6, v=1.0,
        seed=3, enforce_stop=False, independent_arms=True,
        weight_scale="sd", evolution="per_arm",
    )
    session = LiveSession.create(cfg)
    rng = np.random.default_rng(12)
    for _ in range(8):
        session.enroll()
        session.record_outcome(float(rng.normal(1.0)))
    text = eventlog.dumps(session.config, session.records)
    parsed_cfg, parsed_records = eventlog.loads(text)
    report = eventlog.replay(parsed_cfg, parsed_records)
    assert report.ok, report.mismatches
    assert report.final_t == session.t
    assert list(report.final_state_m) == session.core.state.m.tolist()


def test_loads_rejects_foreign_text():
    with pytest.raises(ValueError):
        eventlog.loads("not,a,log\n")
