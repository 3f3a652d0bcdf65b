"""HTTP facade over live trial sessions.

One append-only event-log file per trial under the data directory; every
acknowledged mutation is fsync'd before the response goes out, and a
restart replays the logs back to the last acknowledged state.  Mutations
carry an If-Match revision header; a stale or missing revision gets 409.
Mutations on one trial are serialized by a per-trial lock; distinct
trials proceed concurrently.
"""

from __future__ import annotations

import json
import math
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Header, HTTPException, Response

from . import eventlog
from .errors import ProtocolError
from .trial import LiveSession, Phase, TrialConfig
from .allocation import Arm
from .trial import detect_switch

WAL_SUFFIX = ".wal"


@dataclass
class TrialResource:
    trial_id: str
    session: LiveSession
    path: Path
    revision: int
    lock: threading.Lock = field(default_factory=threading.Lock)
    poisoned: bool = False


class TrialStore:
    """In-memory registry backed by per-trial write-ahead logs."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        manifest = self.data_dir / "manifest.json"
        if not manifest.exists():
            from . import __version__
            from .outputs import write_json

            write_json(manifest, {"schema_version": 1, "tool": "dlmtrial", "version": __version__})
        self._lock = threading.Lock()
        self._trials: dict[str, TrialResource] = {}
        self._recover()

    def _recover(self) -> None:
        for path in sorted(self.data_dir.glob(f"*{WAL_SUFFIX}")):
            trial_id = path.name[: -len(WAL_SUFFIX)]
            events = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]
            if not events or events[0].get("event") != "created":
                raise RuntimeError(f"{path}: corrupt log, missing created event")
            config = TrialConfig.from_dict(events[0]["config"])
            session = LiveSession.replay(config, events[1:])
            self._trials[trial_id] = TrialResource(
                trial_id=trial_id, session=session, path=path, revision=len(events)
            )

    def create(self, config: TrialConfig) -> TrialResource:
        with self._lock:
            trial_id = uuid.uuid4().hex[:12]
            while trial_id in self._trials:
                trial_id = uuid.uuid4().hex[:12]
            path = self.data_dir / f"{trial_id}{WAL_SUFFIX}"
            resource = TrialResource(trial_id=trial_id, session=LiveSession(config), path=path, revision=0)
            self._append(resource, {"event": "created", "schema": 1, "config": config.to_dict()})
            resource.revision = 1
            self._trials[trial_id] = resource
            return resource

    def get(self, trial_id: str) -> TrialResource:
        with self._lock:
            resource = self._trials.get(trial_id)
        if resource is None:
            raise HTTPException(status_code=404, detail=f"unknown trial {trial_id}")
        return resource

    def list(self) -> list[TrialResource]:
        with self._lock:
            return sorted(self._trials.values(), key=lambda r: r.trial_id)

    @staticmethod
    def _append(resource: TrialResource, event: dict) -> None:
        line = json.dumps(event, sort_keys=True, separators=(",", ":"))
        with open(resource.path, "a", encoding="utf-8") as fp:
            fp.write(line + "\n")
            fp.flush()
            os.fsync(fp.fileno())

    def commit(self, resource: TrialResource, event: dict) -> int:
        """Durably append one mutation event and bump the revision."""
        try:
            self._append(resource, event)
        except OSError as exc:
            resource.poisoned = True
            raise HTTPException(status_code=500, detail=f"storage fault: {exc}") from exc
        resource.revision += 1
        return resource.revision


def _check_revision(resource: TrialResource, if_match: str | None) -> None:
    if resource.poisoned:
        raise HTTPException(status_code=500, detail="trial storage is poisoned")
    if if_match is None:
        raise HTTPException(status_code=409, detail="mutation requires If-Match revision")
    try:
        revision = int(if_match.strip().strip('"'))
    except ValueError:
        raise HTTPException(status_code=409, detail=f"malformed If-Match {if_match!r}")
    if revision != resource.revision:
        raise HTTPException(
            status_code=409,
            detail=f"revision conflict: expected {resource.revision}, got {revision}",
        )


def _state_payload(resource: TrialResource) -> dict:
    session = resource.session
    records = session.records
    if session.pending is not None:
        current_w_a = session.pending.step.weights.w_a
    elif session.phase in (Phase.AWAITING_ENROLL, Phase.STOPPED):
        current_w_a = session.core.next_allocation().weights.w_a
    else:
        current_w_a = None
    bf = session.core.last_bf
    summary = session.summary()
    pending = None
    if session.pending is not None:
        pending = {
            "patient_index": session.t + 1,
            "arm": session.pending.arm.value,
            "w_a": session.pending.step.weights.w_a,
        }
    return {
        "phase": session.phase.value,
        "t": session.t,
        "n_a": summary.n_a,
        "n_b": summary.n_b,
        "current_w_a": current_w_a,
        "pending": pending,
        "posterior_mean": list(summary.posterior_mean),
        "posterior_cov": [list(row) for row in summary.posterior_cov],
        "bf01": None if bf is None else bf.bf01,
        "bf_trajectory": [{"t": r.t, "bf01": r.bf01} for r in records],
        "weight_trajectory": [{"t": r.t, "w_a": r.w_a} for r in records],
        "switch_index": detect_switch([r.w_a for r in records]),
        "recommendation": summary.recommendation.value,
        "budget": session.config.budget,
        "bf_threshold": session.config.bf_threshold,
        "revision": resource.revision,
    }


def create_app(data_dir: Path) -> FastAPI:
    app = FastAPI(title="dlmtrial live service")
    store = TrialStore(data_dir)
    app.state.store = store

    @app.post("/trials", status_code=201)
    def create_trial(payload: dict = Body(...)):
        if payload.get("truth") is not None:
            raise HTTPException(status_code=422, detail="live trials must not carry a simulation truth")
        try:
            config = TrialConfig.from_dict(payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=f"invalid config: {exc}") from exc
        resource = store.create(config)
        return {"trial_id": resource.trial_id, "revision": resource.revision}

    @app.post("/trials/{trial_id}/enroll")
    def enroll(
        trial_id: str,
        payload: dict | None = Body(None),
        if_match: str | None = Header(None, alias="If-Match"),
    ):
        resource = store.get(trial_id)
        override = bool(payload.get("override_stop", False)) if payload else False
        with resource.lock:
            _check_revision(resource, if_match)
            try:
                ticket = resource.session.enroll(override_stop=override)
            except ProtocolError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            revision = store.commit(resource, {"event": "enroll", "override_stop": override})
            return {
                "patient_index": ticket.patient_index,
                "arm": ticket.arm.value,
                "w_a": ticket.w_a,
                "forecasts": {
                    "f_a": ticket.forecasts.f_a,
                    "q_a": ticket.forecasts.q_a,
                    "f_b": ticket.forecasts.f_b,
                    "q_b": ticket.forecasts.q_b,
                },
                "revision": revision,
            }

    @app.post("/trials/{trial_id}/outcome")
    def record_outcome(
        trial_id: str,
        payload: dict = Body(...),
        if_match: str | None = Header(None, alias="If-Match"),
    ):
        resource = store.get(trial_id)
        y = payload.get("y")
        if not isinstance(y, (int, float)) or isinstance(y, bool) or not math.isfinite(y):
            raise HTTPException(status_code=422, detail=f"outcome y must be a finite number, got {y!r}")
        with resource.lock:
            _check_revision(resource, if_match)
            try:
                summary = resource.session.record_outcome(float(y))
            except ProtocolError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            revision = store.commit(resource, {"event": "outcome", "y": float(y)})
            bf = summary.bf
            return {
                "t": summary.t,
                "n_a": summary.n_a,
                "n_b": summary.n_b,
                "posterior_mean": list(summary.posterior_mean),
                "posterior_cov": [list(row) for row in summary.posterior_cov],
                "bf01": None if bf is None else bf.bf01,
                "recommendation": summary.recommendation.value,
                "revision": revision,
            }

    @app.get("/trials/{trial_id}/state")
    def get_state(trial_id: str):
        resource = store.get(trial_id)
        with resource.lock:
            return _state_payload(resource)

    @app.get("/trials/{trial_id}/export")
    def export(trial_id: str):
        resource = store.get(trial_id)
        with resource.lock:
            text = eventlog.dumps(resource.session.config, resource.session.records)
            return Response(
                content=text,
                media_type="text/plain; charset=utf-8",
                headers={"X-Revision": str(resource.revision)},
            )

    @app.get("/trials")
    def list_trials():
        items = []
        for resource in store.list():
            with resource.lock:
                summary = resource.session.summary()
                items.append(
                    {
                        "trial_id": resource.trial_id,
                        "phase": resource.session.phase.value,
                        "t": resource.session.t,
                        "n_a": summary.n_a,
                        "n_b": summary.n_b,
                        "revision": resource.revision,
                    }
                )
        return {"trials": items}

    return app
