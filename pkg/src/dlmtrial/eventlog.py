"""Per-patient event-log files and their replay verification.

Format: a header line carrying the trial configuration, a column-name
line, then one comma-separated record per patient in the fixed order
(t, arm, u, y, w_A, f_A, Q_A, f_B, Q_B, bf01).  Floats are written with
17 significant digits so parsing reproduces every value bit-exactly;
an empty bf01 field means the statistic was not yet evaluable.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .allocation import Arm, draw_arm
from .errors import ReplayMismatch
from .stopping import BfResult
from .trial import PatientRecord, TrialConfig, TrialCore

HEADER_PREFIX = "#dlmtrial-eventlog"
FORMAT_VERSION = 1
COLUMNS = ("t", "arm", "u", "y", "w_A", "f_A", "Q_A", "f_B", "Q_B", "bf01")


def format_float(x: Optional[float]) -> str:
    return "" if x is None else "%.17g" % x


def record_line(rec: PatientRecord) -> str:
    return ",".join(
        (
            str(rec.t),
            rec.arm.value,
            format_float(rec.u),
            format_float(rec.y),
            format_float(rec.w_a),
            format_float(rec.f_a),
            format_float(rec.q_a),
            format_float(rec.f_b),
            format_float(rec.q_b),
            format_float(rec.bf01),
        )
    )


def dumps(config: TrialConfig, records: list[PatientRecord]) -> str:
    out = io.StringIO()
    out.write(f"{HEADER_PREFIX} v={FORMAT_VERSION} config={config.canonical_json()}\n")
    out.write(",".join(COLUMNS) + "\n")
    for rec in records:
        out.write(record_line(rec) + "\n")
    return out.getvalue()


def write(path: Path, config: TrialConfig, records: list[PatientRecord]) -> None:
    from .outputs import write_text_atomic

    write_text_atomic(path, dumps(config, records))


def _parse_record(line: str, lineno: int) -> PatientRecord:
    parts = line.split(",")
    if len(parts) != len(COLUMNS):
        raise ValueError(f"line {lineno}: expected {len(COLUMNS)} fields, got {len(parts)}")
    return PatientRecord(
        t=int(parts[0]),
        arm=Arm(parts[1]),
        u=float(parts[2]),
        y=float(parts[3]),
        w_a=float(parts[4]),
        f_a=float(parts[5]),
        q_a=float(parts[6]),
        f_b=float(parts[7]),
        q_b=float(parts[8]),
        bf01=None if parts[9] == "" else float(parts[9]),
    )


def loads(text: str) -> tuple[TrialConfig, list[PatientRecord]]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(HEADER_PREFIX):
        raise ValueError("not an event log: missing header line")
    header = lines[0]
    marker = " config="
    at = header.find(marker)
    if at < 0:
        raise ValueError("header line carries no config")
    import json

    config = TrialConfig.from_dict(json.loads(header[at + len(marker):]))
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line or line == ",".join(COLUMNS):
            continue
        records.append(_parse_record(line, lineno))
    return config, records


def load(path: Path) -> tuple[TrialConfig, list[PatientRecord]]:
    return loads(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class ReplayReport:
    ok: bool
    n_records: int
    final_state_m: tuple[float, ...]
    final_state_c: tuple[tuple[float, ...], ...]
    final_t: int
    final_bf: Optional[BfResult]
    mismatches: list[str]


def replay(config: TrialConfig, records: list[PatientRecord]) -> ReplayReport:
    """Refold the recorded (u, arm, y) sequence through the engine and
    check every stored quantity against the recomputation.

    Stored floats round-trip exactly, so any disagreement at all means
    the log and the engine diverged.
    """
    core = TrialCore(config)
    mismatches: list[str] = []

    def check(t: int, name: str, stored, computed) -> None:
        if stored != computed:
            mismatches.append(f"t={t}: {name} stored {stored!r} != recomputed {computed!r}")

    for rec in records:
        step = core.next_allocation()
        check(rec.t, "w_A", rec.w_a, step.weights.w_a)
        check(rec.t, "f_A", rec.f_a, step.fc_a.f)
        check(rec.t, "Q_A", rec.q_a, step.fc_a.Q)
        check(rec.t, "f_B", rec.f_b, step.fc_b.f)
        check(rec.t, "Q_B", rec.q_b, step.fc_b.Q)
        expected_arm = draw_arm(step.weights, rec.u)
        check(rec.t, "arm", rec.arm.value, expected_arm.value)
        applied, bf = core.apply_outcome(step, rec.u, rec.arm, rec.y)
        check(rec.t, "t", rec.t, applied.t)
        check(rec.t, "bf01", rec.bf01, None if bf is None else bf.bf01)

    state = core.state
    return ReplayReport(
        ok=not mismatches,
        n_records=len(records),
        final_state_m=tuple(state.m.tolist()),
        final_state_c=tuple(tuple(row) for row in state.C.tolist()),
        final_t=state.t,
        final_bf=core.last_bf,
        mismatches=mismatches,
    )


def replay_file(path: Path) -> ReplayReport:
    config, records = load(path)
    return replay(config, records)


def verify_file(path: Path) -> ReplayReport:
    report = replay_file(path)
    if not report.ok:
        raise ReplayMismatch("; ".join(report.mismatches[:5]))
    return report
