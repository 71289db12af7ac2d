"""HTTP control plane: submit plans, drive the session state machine, stream
live samples over server-sent events, download data, run scripts.

Env vars: MPADA_BIND_ADDR (host:port for `mpada serve`), MPADA_TOKEN (shared
bearer token; auth disabled when unset), MPADA_DATA_DIR (export spool),
MPADA_UI_DIR (static frontend assets mounted at /).
"""

from __future__ import annotations

import io
import json
import os
import threading
import time
import zipfile
from pathlib import Path
from queue import Empty

import numpy as np
from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .datastore import write_session_archive
from .engine import (AcquisitionPlan, Session, SessionState, run_plan,
                     validate_plan)
from .errors import ConfigError, MpadaError
from .peripherals import flux_to_angle
from .rig import Rig, build_rig
from .samples import (ActuationEvent, AngleSample, ErrorMarker, GapMarker,
                      MagneticFluxSample, TimestampedSample, TraceSample)

STREAM_TRACE_MAX_POINTS = 200
SCRIPT_VERBS = ("set_grid", "set_plan", "submit", "start", "wait", "stop", "export_csv")


class SessionHandle:
    def __init__(self, plan: AcquisitionPlan, rig: Rig, session: Session):
        self.plan = plan
        self.rig = rig
        self.session = session
        self.thread: threading.Thread | None = None

    def start(self):
        if self.session.state != SessionState.IDLE:
            raise MpadaError(f"cannot start from state {self.session.state.value}")
        self.session.state = SessionState.RUNNING
        self.thread = threading.Thread(target=self._run, daemon=True,
                                       name=f"session-{self.session.id}")
        self.thread.start()

    def _run(self):
        try:
            run_plan(self.plan, self.rig.devices, self.session)
        except Exception as exc:
            self.session.append("cycle", self.rig.devices.clock.now_ms(),
                                ErrorMarker(f"engine failure: {exc}"))
            self.session.finish(SessionState.ABORTED)
        finally:
            self.rig.close()

    def stop(self, timeout_s: float = 10.0):
        if self.session.state != SessionState.RUNNING:
            raise MpadaError(f"cannot stop from state {self.session.state.value}")
        self.session.stop_event.set()
        if self.thread is not None:
            self.thread.join(timeout=timeout_s)

    def view(self) -> dict:
        s = self.session
        last = {m: buf[-1].t_ms for m, buf in s.buffers.items() if buf}
        return {
            "id": s.id,
            "state": s.state.value,
            "partial": s.partial,
            "plan": {
                "mode": self.plan.mode,
                "duration_ms": self.plan.duration_ms,
                "intervals_ms": self.plan.target_intervals(),
            },
            "sample_counts": s.sample_counts(),
            "last_sample_t_ms": last,
        }


def sample_to_event(sample: TimestampedSample) -> dict | None:
    p = sample.payload
    event: dict = {"t_ms": sample.t_ms, "modality": sample.modality}
    if isinstance(p, TraceSample):
        trace = p.trace
        n = trace.grid.n_points
        stride = max(1, -(-n // STREAM_TRACE_MAX_POINTS))
        freqs = trace.grid.frequencies()[::stride]
        mags = np.abs(trace.values)[::stride]
        event.update(kind="trace", step_id=p.step_id, tx=trace.path[0], rx=trace.path[1],
                     f_hz=[float(f) for f in freqs], mag=[float(m) for m in mags])
    elif isinstance(p, MagneticFluxSample):
        event.update(kind="flux", bx=p.bx, by=p.by, bz=p.bz)
        try:
            event["theta_deg"] = flux_to_angle(p).theta_deg
        except MpadaError:
            pass
    elif isinstance(p, AngleSample):
        event.update(kind="angle", theta_deg=p.theta_deg)
    elif isinstance(p, ActuationEvent):
        event.update(kind="actuation", event=p.event, position=p.position)
    elif isinstance(p, GapMarker):
        event.update(kind="gap", missed_ticks=p.missed_ticks)
    elif isinstance(p, ErrorMarker):
        event.update(kind="error", message=p.message)
    else:
        return None
    return event


def create_app(data_dir: str | None = None, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="mpada")
    sessions: dict[str, SessionHandle] = {}
    data_dir = Path(data_dir or os.environ.get("MPADA_DATA_DIR", "mpada-data"))
    token = os.environ.get("MPADA_TOKEN")

    def auth(request: Request):
        if token and request.headers.get("authorization") != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or bad bearer token")

    def handle_of(session_id: str) -> SessionHandle:
        handle = sessions.get(session_id)
        if handle is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return handle

    def submit_document(doc: dict) -> SessionHandle:
        try:
            plan = AcquisitionPlan.from_document(doc)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        try:
            rig = build_rig(plan)
        except MpadaError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        violations = validate_plan(plan, rig.devices)
        if violations:
            rig.close()
            raise HTTPException(status_code=422, detail=violations)
        session = Session(plan, rig.devices.clock)
        handle = SessionHandle(plan, rig, session)
        sessions[session.id] = handle
        return handle

    @app.post("/api/plans", status_code=201)
    def submit_plan(doc: dict, _=Depends(auth)):
        handle = submit_document(doc)
        return {"id": handle.session.id, "state": handle.session.state.value}

    @app.post("/api/sessions/{session_id}/start")
    def start_session(session_id: str, _=Depends(auth)):
        handle = handle_of(session_id)
        try:
            handle.start()
        except MpadaError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"id": session_id, "state": handle.session.state.value}

    @app.post("/api/sessions/{session_id}/stop")
    def stop_session(session_id: str, _=Depends(auth)):
        handle = handle_of(session_id)
        try:
            handle.stop()
        except MpadaError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"id": session_id, "state": handle.session.state.value}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str, _=Depends(auth)):
        return handle_of(session_id).view()

    @app.get("/api/sessions/{session_id}/stream")
    def stream_samples(session_id: str, modalities: str | None = None, _=Depends(auth)):
        handle = handle_of(session_id)
        session = handle.session
        wanted = set(modalities.split(",")) if modalities else None

        def generate():
            tap = session.subscribe()
            try:
                if session.state in (SessionState.COMPLETE, SessionState.ABORTED):
                    yield "event: end\ndata: {}\n\n"
                    return
                while True:
                    try:
                        sample = tap.get(timeout=1.0)
                    except Empty:
                        if session.state in (SessionState.COMPLETE, SessionState.ABORTED):
                            yield "event: end\ndata: {}\n\n"
                            return
                        yield ": keepalive\n\n"
                        continue
                    if sample is None:
                        yield "event: end\ndata: {}\n\n"
                        return
                    if wanted and sample.modality not in wanted:
                        continue
                    event = sample_to_event(sample)
                    if event is not None:
                        yield f"data: {json.dumps(event)}\n\n"
            finally:
                session.unsubscribe(tap)

        return StreamingResponse(generate(), media_type="text/event-stream")

    @app.get("/api/sessions/{session_id}/export")
    def export_session(session_id: str, format: str = "csv", _=Depends(auth)):
        handle = handle_of(session_id)
        session = handle.session
        if session.state not in (SessionState.COMPLETE, SessionState.ABORTED):
            raise HTTPException(status_code=409, detail="session still running")
        if format not in ("csv", "s2p", "snapshot"):
            raise HTTPException(status_code=400, detail=f"unknown format {format!r}")
        session_dir = write_session_archive(session, data_dir)
        suffix = {"csv": (".csv",), "s2p": (".s2p",),
                  "snapshot": (".bin", ".json")}[format]
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            for path in sorted(session_dir.iterdir()):
                if path.suffix in suffix or path.name == "manifest.json":
                    info = zipfile.ZipInfo(path.name)  # fixed metadata: deterministic zip
                    zf.writestr(info, path.read_bytes())
        return Response(content=buf.getvalue(), media_type="application/zip",
                        headers={"Content-Disposition":
                                 f"attachment; filename={session.id}-{format}.zip"})

    @app.post("/api/script")
    def run_script(doc: dict, _=Depends(auth)):
        commands = doc.get("commands")
        if not isinstance(commands, list) or not commands:
            raise HTTPException(status_code=400, detail="script needs a command list")
        for i, cmd in enumerate(commands):
            if not isinstance(cmd, dict) or cmd.get("verb") not in SCRIPT_VERBS:
                raise HTTPException(
                    status_code=400,
                    detail=f"unknown verb at position {i}: {cmd.get('verb') if isinstance(cmd, dict) else cmd!r}")

        report = []
        working_plan: dict = {}
        current: SessionHandle | None = None
        for cmd in commands:
            verb = cmd["verb"]
            args = cmd.get("args", {})
            try:
                if verb == "set_plan":
                    working_plan = dict(args)
                elif verb == "set_grid":
                    working_plan.setdefault("grid", {}).update(
                        start_hz=args["start_hz"], stop_hz=args["stop_hz"],
                        n_points=args["n_points"])
                elif verb == "submit":
                    current = submit_document(working_plan)
                elif verb == "start":
                    if current is None:
                        raise MpadaError("no submitted session")
                    current.start()
                elif verb == "wait":
                    if current is None:
                        raise MpadaError("no submitted session")
                    deadline = time.monotonic() + float(args.get("timeout_s", 120.0))
                    while (current.session.state == SessionState.RUNNING
                           and time.monotonic() < deadline):
                        time.sleep(0.05)
                elif verb == "stop":
                    if current is None:
                        raise MpadaError("no submitted session")
                    current.stop()
                elif verb == "export_csv":
                    if current is None:
                        raise MpadaError("no submitted session")
                    write_session_archive(current.session, data_dir)
                report.append({"verb": verb, "ok": True,
                               **({"session_id": current.session.id} if current else {})})
            except (MpadaError, HTTPException, KeyError) as exc:
                detail = exc.detail if isinstance(exc, HTTPException) else str(exc)
                report.append({"verb": verb, "ok": False, "error": detail})
                return JSONResponse(status_code=200,
                                    content={"ok": False, "report": report})
        return {"ok": True, "report": report}

    ui_dir = ui_dir or os.environ.get("MPADA_UI_DIR")
    if ui_dir is None:
        candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if candidate.is_dir():
            ui_dir = str(candidate)
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    app.state.sessions = sessions
    return app
