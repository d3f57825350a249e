"""HTTP service exposing sessions, actions, graph snapshots, and an SSE
event stream to the browser UI.

Endpoints:
    POST /sessions                {"title": str}           -> {"session_id"}
    POST /sessions/load           {"path": str}             -> {"session_id"}
    GET  /sessions/{id}/graph                               -> GraphDocument
    GET  /sessions/{id}/state                               -> sidebar state
    POST /sessions/{id}/actions   {"type": ..., ...}        -> action result
    GET  /sessions/{id}/events?after=<seq>                  -> SSE AgentEvents

Every mutation is funneled through the session's orchestrator lock; the
stream is an independent reader of the event log, resumable by last-seen seq.
"""

from __future__ import annotations

import asyncio
import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse

from . import persistence
from .gateway import Gateway, MockScript, ScriptedGateway
from .graph import ConversationGraph, GraphError, create_graph
from .orchestrator import (
    ADD_ROOT,
    BUILD_FROM,
    EDIT,
    MERGE,
    InterventionPolicy,
    ModelSettings,
    Orchestrator,
    selection_affordances,
)
from .transcript import linearize


class InvalidAction(Exception):
    pass


@dataclass
class ServiceConfig:
    gateway_factory: object = None  # Callable[[], Gateway]
    policy: InterventionPolicy = field(default_factory=InterventionPolicy)
    model: ModelSettings = field(default_factory=ModelSettings)
    data_dir: Path = field(default_factory=lambda: Path("./chatgrapht-data"))
    gateway_mode: str = "mock"

    def make_gateway(self) -> Gateway:
        if self.gateway_factory is None:
            return ScriptedGateway(MockScript())
        return self.gateway_factory()


class Session:
    def __init__(self, session_id: str, orchestrator: Orchestrator, config: ServiceConfig):
        self.session_id = session_id
        self.orchestrator = orchestrator
        self.config = config
        self.lock = threading.Lock()

    @property
    def graph(self) -> ConversationGraph:
        return self.orchestrator.graph

    def _persist(self) -> None:
        data_dir = self.config.data_dir
        data_dir.mkdir(parents=True, exist_ok=True)
        persistence.save_graph(self.graph, data_dir / f"{self.session_id}.graph.json")
        log = persistence.EventLog(
            header=persistence.SessionHeader(
                title=self.graph.title,
                policy=self.orchestrator.policy,
                model=self.orchestrator.model,
                gateway_mode=self.config.gateway_mode,
            ),
            events=self.orchestrator.events,
        )
        persistence.save_event_log(log, data_dir / f"{self.session_id}.events.jsonl")

    def apply(self, action: dict) -> dict:
        """Validate an action against the current affordances, run it, and
        persist the session. Raises InvalidAction for gated-out actions."""
        kind = action.get("type")
        orch = self.orchestrator
        with self.lock:
            result = self._dispatch(kind, action, orch)
            self._persist()
            return result

    def _gate(self, kind: str, selection: list[str]) -> None:
        if kind not in selection_affordances(self.graph, selection):
            raise InvalidAction(f"{kind} is not available for selection {selection}")

    def _dispatch(self, kind: str, action: dict, orch: Orchestrator) -> dict:
        if kind == "AddRoot":
            self._gate(ADD_ROOT, [])
            return orch.user_add_root(action["text"], action.get("fanout", 1))
        if kind == "BuildFrom":
            self._gate(BUILD_FROM, [action["parent"]])
            return orch.user_add_prompt(
                [action["parent"]], action["text"], action.get("fanout", 1)
            )
        if kind == "Merge":
            self._gate(MERGE, list(action["parents"]))
            return orch.user_add_prompt(
                list(action["parents"]), action["text"], action.get("fanout", 1)
            )
        if kind == "EditText":
            self._gate(EDIT, [action["node"]])
            return orch.user_edit_text(action["node"], action["text"])
        if kind == "SetPosition":
            return orch.user_set_position(action["node"], action["x"], action["y"])
        if kind == "Select":
            return {"affordances": orch.user_select(list(action["nodes"]))}
        if kind == "AcceptIntervention":
            if orch.pending_intervention is None:
                raise InvalidAction("no pending intervention")
            return {"node": orch.accept_pending()}
        if kind == "DismissIntervention":
            if orch.pending_intervention is None:
                raise InvalidAction("no pending intervention")
            orch.dismiss_pending()
            return {"dismissed": True}
        raise InvalidAction(f"unknown action type: {kind}")


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="chatgrapht")
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions
    app.state.config = config

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail={"error": "UnknownSession"})
        return session

    def new_session(graph: ConversationGraph) -> Session:
        session_id = uuid.uuid4().hex[:12]
        orchestrator = Orchestrator(
            graph, config.make_gateway(), policy=config.policy, model=config.model
        )
        session = Session(session_id, orchestrator, config)
        sessions[session_id] = session
        return session

    @app.post("/sessions")
    async def create_session(body: dict):
        session = new_session(create_graph(body.get("title", "")))
        return {"session_id": session.session_id}

    @app.post("/sessions/load")
    async def load_session(body: dict):
        try:
            graph = persistence.load_graph(body["path"])
        except (persistence.StorageError, persistence.SchemaVersionUnsupported,
                persistence.ValidationFailed) as exc:
            raise HTTPException(status_code=400, detail={"error": type(exc).__name__,
                                                         "message": str(exc)})
        session = new_session(graph)
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}/graph")
    async def get_graph(session_id: str):
        session = get_session(session_id)
        return persistence.graph_to_document(session.graph)

    @app.get("/sessions/{session_id}/state")
    async def get_state(session_id: str):
        session = get_session(session_id)
        orch = session.orchestrator
        return {
            "pending_intervention": (
                orch.pending_intervention.to_dict() if orch.pending_intervention else None
            ),
            "advice": [iv.to_dict() for iv in orch.advice_feed],
            "guidance": orch.guidance.text if orch.guidance else None,
            "event_count": len(orch.events),
        }

    @app.get("/sessions/{session_id}/transcript/{node_id}")
    async def get_transcript(session_id: str, node_id: str):
        session = get_session(session_id)
        try:
            transcript = linearize(session.graph, node_id)
        except GraphError as exc:
            raise HTTPException(status_code=400, detail={"error": type(exc).__name__,
                                                         "message": str(exc)})
        return {"entries": [
            {"role": e.role, "text": e.text, "source": e.source} for e in transcript.entries
        ]}

    @app.post("/sessions/{session_id}/actions")
    async def post_action(session_id: str, body: dict):
        session = get_session(session_id)
        try:
            result = await asyncio.to_thread(session.apply, body)
        except InvalidAction as exc:
            return JSONResponse(
                status_code=400, content={"error": "InvalidAction", "message": str(exc)}
            )
        except GraphError as exc:
            return JSONResponse(
                status_code=400,
                content={"error": type(exc).__name__, "message": str(exc)},
            )
        return {"ok": True, "result": result}

    @app.get("/sessions/{session_id}/events")
    async def event_stream(session_id: str, after: int = 0, follow: bool = True):
        session = get_session(session_id)

        # client disconnects cancel the generator task; no explicit poll needed
        async def generate():
            last = after
            while True:
                events = session.orchestrator.events
                while last < len(events):
                    event = events[last]
                    last = event.seq
                    data = json.dumps(event.to_dict(), ensure_ascii=False)
                    yield f"id: {event.seq}\nevent: agent\ndata: {data}\n\n"
                if not follow:
                    return
                await asyncio.sleep(0.05)

        return StreamingResponse(generate(), media_type="text/event-stream")

    return app
