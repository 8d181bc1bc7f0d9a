"""HTTP boundary: session lifecycle, batched ingestion, queries, export."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import exporter
from ..errors import BadPlayerName, NotComplete, UnknownPack, UnknownSession, UnsupportedFormat
from ..service import GameService, IngestResult, PromptPayload
from ..session import AnswerEvent, BoothReachedEvent, MoveEvent
from ..timefmt import ms_to_iso
from ..world import PLAYER_SPEED
from .schemas import (
    BlueprintResponse,
    CreateSessionRequest,
    CreateSessionResponse,
    IngestRequest,
    IngestResponse,
    StateResponse,
    WireEvent,
)


def _http_error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _to_event(ev: WireEvent):
    if ev.type == "move":
        return MoveEvent(
            position=(ev.position.x, ev.position.y, ev.position.z),
            euler=(ev.euler.x, ev.euler.y, ev.euler.z),
            ts=ev.ts,
        )
    if ev.type == "answer":
        return AnswerEvent(question=ev.question, choice=ev.choice, ts=ev.ts)
    return BoothReachedEvent(ts=ev.ts)


def _prompt_out(p: Optional[PromptPayload]) -> Optional[dict]:
    if p is None:
        return None
    return {
        "question": p.question,
        "prompt": p.prompt,
        "choices": [{"key": k, "text": t} for k, t in p.choices],
    }


def _ingest_response(result: IngestResult) -> IngestResponse:
    return IngestResponse(
        accepted=result.accepted,
        opened_prompt=_prompt_out(result.opened_prompt),
        completed=result.completed,
        rejected_from=result.rejected_from,
        error=None if result.error is None else {"code": result.error[0], "message": result.error[1]},
    )


def create_app(service: GameService, client_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="epolis", version="0.1.0")

    @app.post("/v1/sessions", response_model=CreateSessionResponse, status_code=201)
    def create_session(body: CreateSessionRequest):
        try:
            sess = service.create_session(body.player_name, body.avatar, body.pack_id)
        except UnknownPack as exc:
            raise _http_error(404, "UNKNOWN_PACK", str(exc)) from None
        except BadPlayerName as exc:
            raise _http_error(400, "BAD_PLAYER_NAME", str(exc)) from None
        x, y, z = sess.player.position
        return CreateSessionResponse(
            session_id=sess.session_id,
            map=service.cmap.to_document(),
            dilemma_count=service.pack.size,
            spawn={"x": x, "y": y, "z": z},
            speed=PLAYER_SPEED,
        )

    @app.post("/v1/sessions/{session_id}/events", response_model=IngestResponse)
    def ingest(session_id: str, body: IngestRequest):
        try:
            result = service.ingest(session_id, [_to_event(e) for e in body.events])
        except UnknownSession as exc:
            raise _http_error(404, "UNKNOWN_SESSION", str(exc)) from None
        response = _ingest_response(result)
        if result.error is not None:
            return JSONResponse(status_code=409, content=response.model_dump())
        return response

    @app.get("/v1/sessions/{session_id}/state", response_model=StateResponse)
    def state(session_id: str):
        try:
            snapshot = service.state(session_id)
        except UnknownSession as exc:
            raise _http_error(404, "UNKNOWN_SESSION", str(exc)) from None
        snapshot["open_prompt"] = _prompt_out(snapshot["open_prompt"])
        return snapshot

    @app.get("/v1/sessions/{session_id}/blueprint", response_model=BlueprintResponse)
    def blueprint(session_id: str):
        try:
            bp = service.blueprint_of(session_id)
        except UnknownSession as exc:
            raise _http_error(404, "UNKNOWN_SESSION", str(exc)) from None
        except NotComplete as exc:
            raise _http_error(409, "NOT_COMPLETE", str(exc)) from None
        return BlueprintResponse(
            attributes=[{"name": a.name, "score": a.score, "tier": a.tier} for a in bp.attributes],
            answers=[{"question": q, "choice": c} for q, c in bp.answers],
            completed_ts=ms_to_iso(bp.completed_ts),
        )

    @app.get("/v1/export")
    def export(kind: str, format: str, mode: str = "paper"):
        try:
            fmt = exporter.parse_format(format)
            export_mode = exporter.parse_mode(mode)
            if kind == "actions":
                payload = exporter.export_actions(service.store.query_actions(), fmt, export_mode)
            elif kind == "movements":
                payload = exporter.export_movements(service.store.query_movements(), fmt, export_mode)
            else:
                raise UnsupportedFormat(f"kind must be actions or movements, not {kind!r}")
        except UnsupportedFormat as exc:
            raise _http_error(400, "UNSUPPORTED_FORMAT", str(exc)) from None
        return Response(content=payload, media_type=exporter.CONTENT_TYPES[fmt])

    if client_dir is not None and Path(client_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(client_dir), html=True), name="client")

    return app
