"""Versioned on-disk graph documents and append-only session event logs.

Graph documents are canonical UTF-8 JSON (sorted keys, nodes sorted by id,
default float formatting) so saves are byte-deterministic and diff-able.
The event log is newline-delimited JSON, one AgentEvent per line after a
session header; replaying a log against a deterministic gateway rebuilds
the exact final graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .gateway import Gateway
from .graph import (
    Author,
    ConversationGraph,
    Node,
    NodeKind,
    NodeStatus,
)
from .orchestrator import (
    AgentEvent,
    EventKind,
    InterventionPolicy,
    MetaIntervention,
    ModelSettings,
    Orchestrator,
)

SUPPORTED_SCHEMA_VERSIONS = (1,)


class StorageError(Exception):
    pass


class SchemaVersionUnsupported(Exception):
    def __init__(self, version):
        self.version = version
        super().__init__(f"unsupported schema version: {version}")


class ValidationFailed(Exception):
    def __init__(self, violations):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class MalformedLog(Exception):
    pass


# -- graph documents ----------------------------------------------------------


def graph_to_document(graph: ConversationGraph) -> dict:
    return {
        "schema_version": graph.schema_version,
        "title": graph.title,
        "roots": list(graph.roots),
        "nodes": [
            {
                "id": node.id,
                "kind": node.kind.value,
                "author": node.author.value,
                "text": node.text,
                "created_at": node.created_at,
                "status": node.status.value,
                "position": [float(node.position[0]), float(node.position[1])],
                "parents": list(node.parents),
            }
            for _, node in sorted(graph.nodes.items())
        ],
    }


def dumps_canonical(document: dict) -> str:
    return json.dumps(document, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def graph_from_document(document: dict) -> ConversationGraph:
    version = document.get("schema_version")
    if version not in SUPPORTED_SCHEMA_VERSIONS:
        raise SchemaVersionUnsupported(version)
    graph = ConversationGraph(document.get("title", "untitled"))
    try:
        nodes = sorted(document["nodes"], key=lambda n: n["created_at"])
        for raw in nodes:
            node = Node(
                id=raw["id"],
                kind=NodeKind(raw["kind"]),
                author=Author(raw["author"]),
                text=raw["text"],
                created_at=raw["created_at"],
                position=(float(raw["position"][0]), float(raw["position"][1])),
                status=NodeStatus(raw["status"]),
                parents=list(raw["parents"]),
            )
            graph.nodes[node.id] = node
        roots = list(document["roots"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationFailed([f"malformed document: {exc}"]) from exc
    # rebuild derived state
    graph._children = {nid: [] for nid in graph.nodes}
    for nid, node in sorted(graph.nodes.items(), key=lambda kv: kv[1].created_at):
        for p in node.parents:
            if p in graph._children:
                graph._children[p].append(nid)
    graph.roots = roots
    graph.next_seq = max((n.created_at for n in graph.nodes.values()), default=0) + 1
    violations = graph.validate()
    if violations:
        raise ValidationFailed(violations)
    return graph


def save_graph(graph: ConversationGraph, path: str | Path) -> None:
    try:
        Path(path).write_text(dumps_canonical(graph_to_document(graph)), encoding="utf-8")
    except OSError as exc:
        raise StorageError(str(exc)) from exc


def load_graph(path: str | Path) -> ConversationGraph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(str(exc)) from exc
    try:
        document = json.loads(text)
    except ValueError as exc:
        raise StorageError(f"not valid JSON: {exc}") from exc
    return graph_from_document(document)


# -- event log -----------------------------------------------------------------


@dataclass
class SessionHeader:
    title: str = "untitled"
    policy: InterventionPolicy = field(default_factory=InterventionPolicy)
    model: ModelSettings = field(default_factory=ModelSettings)
    gateway_mode: str = "mock"  # mock | real | record | replay

    def to_dict(self) -> dict:
        return {
            "type": "session_header",
            "schema_version": 1,
            "title": self.title,
            "policy": self.policy.to_dict(),
            "model": {
                "model": self.model.model,
                "temperature": self.model.temperature,
                "max_tokens": self.model.max_tokens,
            },
            "gateway_mode": self.gateway_mode,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionHeader":
        if data.get("type") != "session_header":
            raise MalformedLog("first line is not a session header")
        return cls(
            title=data.get("title", "untitled"),
            policy=InterventionPolicy.from_dict(data["policy"]),
            model=ModelSettings(**data["model"]),
            gateway_mode=data.get("gateway_mode", "mock"),
        )


@dataclass
class EventLog:
    header: SessionHeader
    events: list[AgentEvent] = field(default_factory=list)


def save_event_log(log: EventLog, path: str | Path) -> None:
    lines = [json.dumps(log.header.to_dict(), sort_keys=True, ensure_ascii=False)]
    lines += [
        json.dumps(e.to_dict(), sort_keys=True, ensure_ascii=False) for e in log.events
    ]
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise StorageError(str(exc)) from exc


def load_event_log(path: str | Path) -> EventLog:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(str(exc)) from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedLog("empty log file")
    try:
        header = SessionHeader.from_dict(json.loads(lines[0]))
        events = [AgentEvent.from_dict(json.loads(ln)) for ln in lines[1:]]
    except MalformedLog:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedLog(f"bad record: {exc}") from exc
    for i, event in enumerate(events, start=1):
        if event.seq != i:
            raise MalformedLog(f"seq gap: expected {i}, got {event.seq}")
    return EventLog(header=header, events=events)


# -- replay ----------------------------------------------------------------------


def replay(log: EventLog, gateway: Gateway) -> ConversationGraph:
    """Re-execute a session's driver events against a deterministic gateway.

    Human actions (and intervention accept/dismiss outcomes) drive a fresh
    orchestrator; agent-derived events regenerate from the gateway, which in
    Replay mode must cover every request.
    """
    orchestrator = Orchestrator(
        ConversationGraph(log.header.title),
        gateway,
        policy=log.header.policy,
        model=log.header.model,
    )
    for event in log.events:
        if event.kind is EventKind.META_INTERVENTION:
            payload = event.payload_dict()
            disposition = payload.get("disposition")
            if disposition == "dismissed":
                orchestrator.dismiss_pending()
            elif disposition == "applied" and orchestrator.pending_intervention is not None:
                # advice and auto-applied insertions replay via _meta_cycle;
                # only explicit acceptances need driving
                expected = MetaIntervention.from_dict(payload["intervention"])
                if orchestrator.pending_intervention == expected:
                    orchestrator.accept_pending()
                else:
                    raise MalformedLog(
                        f"replayed pending intervention diverges at seq {event.seq}"
                    )
            continue
        if event.actor is not Author.HUMAN:
            continue
        payload = event.payload_dict()
        action = payload.get("action")
        if action == "add_root":
            orchestrator.user_add_root(payload["text"], payload.get("fanout", 1))
        elif action == "add_prompt":
            orchestrator.user_add_prompt(
                payload["parents"], payload["text"], payload.get("fanout", 1)
            )
        elif action == "edit_text":
            orchestrator.user_edit_text(payload["node"], payload["text"])
        elif action == "set_position":
            orchestrator.user_set_position(payload["node"], payload["x"], payload["y"])
        elif action == "select":
            orchestrator.user_select(payload["nodes"])
        else:
            raise MalformedLog(f"unknown human action at seq {event.seq}: {action}")
    return orchestrator.graph
