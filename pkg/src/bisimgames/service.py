"""Embedded HTTP service: interactive game sessions and solve requests over
JSON, plus static hosting for the web client bundle.  Session state lives in
memory; moves on one session are serialized, a losing concurrent request
gets 409."""

from __future__ import annotations

import threading
import time
import uuid
from fractions import Fraction
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .fixpoint import DEFAULT_EPS
from .fixtures import FIXTURE_DOCS, SPACE_DOCS
from .game import IllegalMove
from .solver import GameSession, IncompatibleInstance, decode_move, encode_position, parse_start, solve
from .system import SystemError, parse_rational, parse_system


class SessionRecord:
    def __init__(self, session: GameSession, instance: str, human_side: str):
        self.id = uuid.uuid4().hex
        self.session = session
        self.instance = instance
        self.human_side = human_side
        self.created = time.time()
        self.updated = time.time()
        self.lock = threading.Lock()

    def snapshot(self) -> dict:
        snap = self.session.snapshot()
        snap["id"] = self.id
        snap["created"] = self.created
        snap["updated"] = self.updated
        return snap


def _system_from_body(body: dict):
    if "fixture" in body:
        name = body["fixture"]
        if name not in FIXTURE_DOCS:
            raise SystemError(f"unknown fixture {name!r}")
        return parse_system(FIXTURE_DOCS[name])
    if "system" in body:
        return parse_system(body["system"])
    raise SystemError("request needs 'system' or 'fixture'")


def _eps_from(options: dict) -> Fraction:
    eps = options.get("eps")
    if eps is None:
        return DEFAULT_EPS
    return parse_rational(eps, "options.eps")


def create_app(static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="bisimgames", version="0.1.0")
    sessions: dict[str, SessionRecord] = {}
    app.state.sessions = sessions

    @app.exception_handler(SystemError)
    async def _system_error(_req: Request, exc: SystemError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/systems/examples")
    def examples():
        out = [
            {"name": name, "type": doc["type"], "document": doc}
            for name, doc in sorted(FIXTURE_DOCS.items())
        ]
        out += [
            {"name": name, "type": doc["type"], "document": doc}
            for name, doc in sorted(SPACE_DOCS.items())
        ]
        return out

    @app.post("/solve")
    def solve_endpoint(body: dict):
        from . import report as report_mod

        instance = body.get("instance")
        if not instance:
            raise SystemError("request needs an 'instance'")
        options = body.get("options", {})
        if instance == "hausdorff":
            from .cli import parse_space
            from .instances import hausdorff_codensity, hausdorff_distance
            from .system import format_rational

            doc = body.get("system") or SPACE_DOCS.get(body.get("fixture", ""))
            if doc is None:
                raise SystemError("hausdorff needs a metric-space document")
            d, doc = parse_space(doc)
            s, t = doc.get("S"), doc.get("T")
            if not s or not t:
                raise SystemError("metric-space document needs nonempty 'S' and 'T'")
            direct = hausdorff_distance(d, s, t)
            codensity = hausdorff_codensity(d, s, t)
            return {
                "instance": "hausdorff",
                "direct": format_rational(direct),
                "codensity": format_rational(codensity),
                "coincide": direct == codensity,
                "consistent": direct == codensity,
            }
        system = _system_from_body(body)
        try:
            result = solve(system, instance, eps=_eps_from(options))
        except IncompatibleInstance as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return report_mod.render_json(result, options.get("format", "rational"))

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        system = _system_from_body(body)
        instance = body.get("instance")
        if not instance:
            raise SystemError("request needs an 'instance'")
        start_field = body.get("start")
        if start_field is None:
            raise SystemError("request needs a 'start' position")
        start_text = start_field if isinstance(start_field, str) else ",".join(str(p) for p in start_field)
        start = parse_start(system, instance, start_text)
        human_side = body.get("humanSide", "duplicator")
        options = body.get("options", {})
        try:
            session = GameSession(
                system, instance, start, human_side,
                eps=_eps_from(options), cap=options.get("cap"),
            )
        except IncompatibleInstance as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        record = SessionRecord(session, instance, human_side)
        sessions[record.id] = record
        return record.snapshot()

    def _get_record(session_id: str) -> SessionRecord:
        record = sessions.get(session_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return record

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return _get_record(session_id).snapshot()

    @app.post("/sessions/{session_id}/move")
    def post_move(session_id: str, body: dict):
        record = _get_record(session_id)
        if not record.lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail="a move on this session is in flight")
        try:
            move_doc = body.get("move")
            if move_doc is None:
                raise HTTPException(status_code=422, detail={"error": "request needs a 'move'"})
            try:
                move = decode_move(move_doc, record.session)
                record.session.human_move(move)
            except IllegalMove as exc:
                raise HTTPException(
                    status_code=422,
                    detail={
                        "error": str(exc),
                        "legalMoves": [encode_position(m) for m in exc.legal]
                        or [encode_position(m) for m in record.session.legal_moves()],
                    },
                )
            record.updated = time.time()
            return record.snapshot()
        finally:
            record.lock.release()

    if static_dir is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        if bundled.is_dir():
            static_dir = str(bundled)
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="webui")
    return app
