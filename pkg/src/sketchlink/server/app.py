"""Network layer: WebSocket protocol endpoint, HTTP endpoints, sessions.

One WebSocket endpoint (/ws) carries JSON requests and change events.
Binary payloads travel over plain HTTP (image/SVG GETs, multipart upload).
All state mutations are serialized through one asyncio lock; events are
enqueued per session while holding it, which pins per-session event order
to mutation order.
"""

from __future__ import annotations

import asyncio
import json
import socket
import uuid as uuid_module
from dataclasses import dataclass, field

import uvicorn
from fastapi import FastAPI, File, Form, UploadFile
from fastapi.responses import JSONResponse, RedirectResponse, Response
from fastapi.staticfiles import StaticFiles
from starlette.websockets import WebSocket, WebSocketDisconnect

from sketchlink.anchors import AnchorError, parse_anchor_id
from sketchlink.server.config import ServerConfig
from sketchlink.server.core import (
    ALL_TOPICS,
    Event,
    ProtocolError,
    ServiceCore,
    SketchMeta,
)
from sketchlink.sketches import SKETCH_DIR, IMAGE_DIR

_MEDIA_TYPES = {".png": "image/png", ".jpg": "image/jpeg", ".jpeg": "image/jpeg"}


class BindError(Exception):
    pass


@dataclass
class Session:
    id: str
    websocket: WebSocket
    role: str = "webapp"
    project: str | None = None
    subscriptions: set[str] = field(default_factory=set)
    queue: asyncio.Queue = field(default_factory=asyncio.Queue)


class SessionManager:
    def __init__(self) -> None:
        self.sessions: dict[str, Session] = {}

    def add(self, websocket: WebSocket) -> Session:
        session = Session(id=str(uuid_module.uuid4()), websocket=websocket)
        self.sessions[session.id] = session
        return session

    def drop(self, session: Session) -> None:
        self.sessions.pop(session.id, None)

    def broadcast(self, events: list[Event]) -> None:
        for event in events:
            message = event.to_dict()
            for session in self.sessions.values():
                if event.topic in session.subscriptions:
                    session.queue.put_nowait(message)

    def deliver_navigate(self, project: str, payload: dict) -> int:
        message = {"type": "event", "event": "navigate", **payload}
        count = 0
        for session in self.sessions.values():
            if session.role == "editor" and session.project == project:
                session.queue.put_nowait(message)
                count += 1
        return count

    def editor_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for session in self.sessions.values():
            if session.role == "editor" and session.project:
                counts[session.project] = counts.get(session.project, 0) + 1
        return counts


def _ok(request_id, result: dict) -> dict:
    return {"type": "response", "request_id": request_id, "ok": True, "result": result}


def _err(request_id, error: ProtocolError) -> dict:
    return {"type": "response", "request_id": request_id, "ok": False, "error": error.to_dict()}


async def _handle_message(
    core: ServiceCore,
    manager: SessionManager,
    session: Session,
    lock: asyncio.Lock,
    raw: str,
) -> dict:
    request_id = None
    try:
        try:
            message = json.loads(raw)
        except ValueError as exc:
            raise ProtocolError("ValidationError", f"not valid JSON: {exc}", "protocol")
        if not isinstance(message, dict) or "type" not in message:
            raise ProtocolError("ValidationError", "message needs a type field", "protocol")
        request_id = message.get("request_id")
        msg_type = message["type"]

        if msg_type == "subscribe":
            topics = message.get("topics", list(ALL_TOPICS))
            unknown = [t for t in topics if t not in ALL_TOPICS]
            if unknown:
                raise ProtocolError("ValidationError", f"unknown topics: {unknown}")
            session.subscriptions = set(topics)
            return _ok(request_id, {"subscribed": sorted(session.subscriptions)})

        if msg_type == "register_editor":
            project = message.get("project")
            if project not in core.indexes:
                raise ProtocolError("UnknownProject", f"no project named {project!r}")
            session.role = "editor"
            session.project = project
            return _ok(request_id, {"registered": project})

        if msg_type == "navigate":
            try:
                anchor = parse_anchor_id(str(message.get("anchor", "")))
            except AnchorError as exc:
                raise ProtocolError(type(exc).__name__, str(exc))
            async with lock:
                payload = core.resolve_navigation(anchor)
                delivered = manager.deliver_navigate(payload["project"], payload)
            if delivered == 0:
                raise ProtocolError(
                    "NoEditorConnected",
                    f"no editor registered for project {payload['project']!r}",
                )
            return _ok(request_id, {"delivered": delivered})

        if msg_type == "rescan":
            project = str(message.get("project", ""))
            index = await asyncio.to_thread(core.scan_project, project)
            async with lock:
                summary = core.apply_rescan(project, index)
            return _ok(request_id, summary)

        handlers = {
            "upload_sketch": core.upload_sketch,
            "get_sketch": core.get_sketch,
            "list_sketches": core.list_sketches,
            "add_marker": core.add_marker,
            "remove_marker": core.remove_marker,
            "update_annotation": core.update_annotation,
            "create_link": core.create_link,
            "remove_link": core.remove_link,
            "query_links": core.query_links,
            "list_artifacts": core.list_artifacts,
        }
        handler = handlers.get(msg_type)
        if handler is None:
            raise ProtocolError("UnknownType", f"unknown message type {msg_type!r}", "protocol")
        async with lock:
            result, events = handler(message)
            manager.broadcast(events)
        return _ok(request_id, result)
    except ProtocolError as exc:
        return _err(request_id, exc)


async def _drain(session: Session) -> None:
    while True:
        message = await session.queue.get()
        await session.websocket.send_text(json.dumps(message))


def build_app(core: ServiceCore) -> FastAPI:
    app = FastAPI(title="sketchlink", docs_url=None, redoc_url=None)
    manager = SessionManager()
    lock = asyncio.Lock()
    app.state.core = core
    app.state.manager = manager

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        session = manager.add(websocket)
        sender = asyncio.create_task(_drain(session))
        try:
            while True:
                raw = await websocket.receive_text()
                response = await _handle_message(core, manager, session, lock, raw)
                await websocket.send_text(json.dumps(response))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            manager.drop(session)

    @app.get("/health")
    async def health() -> dict:
        return {
            "status": "ok",
            "sessions": len(manager.sessions),
            "editors": manager.editor_counts(),
            **core.stats(),
        }

    @app.get("/sketch/{name}")
    async def get_sketch_svg(name: str):
        if not name.endswith(".svg"):
            return JSONResponse({"error": "expected <anchor>.svg"}, status_code=404)
        try:
            anchor = parse_anchor_id(name[: -len(".svg")])
        except AnchorError as exc:
            return JSONResponse({"error": str(exc)}, status_code=404)
        doc = core.catalog.get(anchor)
        if doc is None:
            return JSONResponse({"error": f"no sketch {anchor}"}, status_code=404)
        path = core.data_dir / SKETCH_DIR / f"{anchor.uuid}.svg"
        return Response(path.read_bytes(), media_type="image/svg+xml")

    def _serve_image(name: str):
        directory = core.data_dir / IMAGE_DIR
        target = directory / name
        if not target.is_file() and "." not in name:
            matches = list(directory.glob(name + ".*")) if directory.is_dir() else []
            if matches:
                target = matches[0]
        if not target.is_file() or target.parent != directory:
            return JSONResponse({"error": f"no image {name}"}, status_code=404)
        media = _MEDIA_TYPES.get(target.suffix.lower(), "application/octet-stream")
        return Response(target.read_bytes(), media_type=media)

    @app.get("/image/{name}")
    async def get_image(name: str):
        return _serve_image(name)

    # alias so the relative ../images/<file> href inside served SVGs resolves
    @app.get("/images/{name}")
    async def get_image_alias(name: str):
        return _serve_image(name)

    @app.post("/upload")
    async def upload(
        image: UploadFile = File(...),
        annotation: str = Form(""),
        authors: str = Form(""),
        mime: str = Form(""),
    ):
        data = await image.read()
        effective_mime = mime or image.content_type or ""
        meta = SketchMeta(
            annotation=annotation,
            authors=tuple(a.strip() for a in authors.split(",") if a.strip()),
        )
        try:
            async with lock:
                result, events = core.ingest_image(data, effective_mime, meta)
                manager.broadcast(events)
        except ProtocolError as exc:
            return JSONResponse({"error": exc.to_dict()}, status_code=400)
        return JSONResponse(result)

    if core.config.webapp_dir and core.config.webapp_dir.is_dir():
        app.mount(
            "/app",
            StaticFiles(directory=core.config.webapp_dir, html=True),
            name="webapp",
        )

        @app.get("/")
        async def root():
            return RedirectResponse(url="/app/")

    return app


def serve(config: ServerConfig) -> None:
    """Scan configured projects, bind, and run until interrupted."""
    core = ServiceCore(config)
    app = build_app(core)
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((config.host, config.port))
    except OSError as exc:
        sock.close()
        raise BindError(f"cannot bind {config.bind}: {exc}") from exc
    sock.listen(128)
    server = uvicorn.Server(
        uvicorn.Config(app, log_level="warning", access_log=False)
    )
    server.run(sockets=[sock])
