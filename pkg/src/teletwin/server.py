"""Live session service: websocket text frames with a JSON envelope.

Protocol (documented in README, golden-file tested): every message is
{"type": ..., "session_id": ..., "payload": {...}} with types
start_session, input_frame, snapshot, event, report and error. A client
starts one session per connection, streams input frames, and receives a
snapshot per engine tick, events as they occur, and one final report.
Sessions never share state; a disconnect before completion finalizes the
session as failed and persists its report and recorded input log.
"""
from __future__ import annotations

import itertools
import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import EngineConfig
from .footboard import FootSample, Side
from .scenario import ScenarioError, load_bundled
from .session import (
    InputFrame,
    MasterSample,
    SessionState,
    finalize_session,
    frame_from_dict,
    tick,
    write_log,
)

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def neutral_frame(t_ms: int = 0) -> InputFrame:
    """Masters at the origin, jaws open, feet parked off the board."""
    return InputFrame(
        t_ms,
        MasterSample(np.zeros(3), IDENTITY_QUAT.copy(), 0.0),
        MasterSample(np.zeros(3), IDENTITY_QUAT.copy(), 0.0),
        (FootSample(Side.LEFT, np.array([-0.2, -0.35]), 0.0),
         FootSample(Side.RIGHT, np.array([0.2, -0.35]), 0.0)),
    )


def envelope(kind: str, session_id: str, payload: dict) -> str:
    return json.dumps({"type": kind, "session_id": session_id, "payload": payload},
                      sort_keys=False)


class LiveSession:
    """Single-writer engine wrapper behind one websocket connection."""

    def __init__(self, session_id: str, scenario_id: str, cfg: EngineConfig):
        self.session_id = session_id
        self.scenario_id = scenario_id
        self.cfg = cfg
        self.definition = load_bundled(scenario_id)
        self.state = SessionState.create(self.definition, cfg)
        self.frames: list[InputFrame] = []
        self.last_t_ms = -1
        self.next_tick_ms = 0.0
        self.held: InputFrame | None = None
        self.done = False
        self.persisted = False

    def start(self) -> list[str]:
        """Run tick 0 against the neutral frame: home joints, anchored targets."""
        first = neutral_frame(0)
        self.held = first
        self.frames.append(first)
        self.last_t_ms = 0
        out = self._advance_with(first)
        self.next_tick_ms = self.state.tick_index * self.cfg.tick_seconds * 1000.0
        return out

    def _advance_with(self, frame: InputFrame) -> list[str]:
        self.state, events, snapshot = tick(self.state, frame, self.cfg)
        messages = [envelope("snapshot", self.session_id, snapshot.to_dict())]
        messages += [envelope("event", self.session_id,
                              {"tick": e.tick, "kind": e.kind.value,
                               "subject": e.subject})
                     for e in events]
        return messages

    def feed(self, frame: InputFrame) -> list[str]:
        """Advance the fixed-step clock to the frame's time, sample-and-hold."""
        if self.done:
            return [envelope("error", self.session_id,
                             {"category": "warning",
                              "message": "session already finished; frame ignored"})]
        if frame.t_ms <= self.last_t_ms:
            return [envelope("error", self.session_id,
                             {"category": "warning",
                              "message": f"out-of-order frame t={frame.t_ms} dropped"})]
        self.frames.append(frame)
        self.last_t_ms = frame.t_ms
        tick_ms = self.cfg.tick_seconds * 1000.0
        messages: list[str] = []
        while self.next_tick_ms <= frame.t_ms and not self.state.halted:
            use = frame if frame.t_ms <= self.next_tick_ms else self.held
            messages += self._advance_with(use)
            self.next_tick_ms += tick_ms
        self.held = frame
        if self.state.halted and not self.done:
            messages += self.finish()
        return messages

    def finish(self) -> list[str]:
        self.done = True
        _, report_text = finalize_session(self.state, self.cfg)
        return [envelope("report", self.session_id, json.loads(report_text))]

    def persist(self, out_dir: Path):
        if self.persisted:
            return
        self.persisted = True
        out_dir.mkdir(parents=True, exist_ok=True)
        _, report_text = finalize_session(self.state, self.cfg)
        (out_dir / f"{self.session_id}_report.json").write_text(report_text)
        (out_dir / f"{self.session_id}_input.jsonl").write_text(write_log(self.frames))


def create_app(cfg: EngineConfig | None = None, out_dir: str | Path = "sessions",
               static_dir: str | Path | None = None) -> FastAPI:
    cfg = cfg or EngineConfig()
    out_path = Path(out_dir)
    app = FastAPI(title="teletwin session service")
    counter = itertools.count(1)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session: LiveSession | None = None
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    kind = msg["type"]
                    payload = msg.get("payload", {})
                except (json.JSONDecodeError, KeyError, TypeError):
                    await ws.send_text(envelope("error", "", {
                        "category": "bad_message",
                        "message": "expected {type, session_id, payload}"}))
                    continue
                if kind == "start_session":
                    if session is not None:
                        await ws.send_text(envelope("error", session.session_id, {
                            "category": "bad_message",
                            "message": "session already started on this connection"}))
                        continue
                    scenario_id = str(payload.get("scenario_id", ""))
                    session_id = f"s{next(counter)}"
                    try:
                        session = LiveSession(session_id, scenario_id, cfg)
                    except ScenarioError as exc:
                        await ws.send_text(envelope("error", session_id, {
                            "category": "unknown_scenario", "message": str(exc)}))
                        await ws.close()
                        return
                    for message in session.start():
                        await ws.send_text(message)
                elif kind == "input_frame":
                    if session is None:
                        await ws.send_text(envelope("error", "", {
                            "category": "bad_message",
                            "message": "start_session first"}))
                        continue
                    try:
                        frame = frame_from_dict(payload)
                    except (KeyError, TypeError, ValueError) as exc:
                        await ws.send_text(envelope(
                            "error", session.session_id,
                            {"category": "bad_frame", "message": str(exc)}))
                        continue
                    for message in session.feed(frame):
                        await ws.send_text(message)
                    if session.done:
                        session.persist(out_path)
                else:
                    sid = session.session_id if session else ""
                    await ws.send_text(envelope("error", sid, {
                        "category": "bad_message",
                        "message": f"unknown message type '{kind}'"}))
        except WebSocketDisconnect:
            if session is not None and not session.done:
                session.done = True
                session.persist(out_path)

    @app.get("/scenarios")
    def scenarios():
        from .scenario import bundled_scenario_ids
        return {"scenarios": list(bundled_scenario_ids())}

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="console")
    return app


def serve(cfg: EngineConfig | None = None, port: int = 8700,
          out_dir: str | Path = "sessions",
          static_dir: str | Path | None = None):
    """Run the service until interrupted (blocking)."""
    import uvicorn
    app = create_app(cfg, out_dir, static_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
