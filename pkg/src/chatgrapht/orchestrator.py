"""The two-agent loop over a shared conversation graph.

The Graph Agent answers prompts (optionally fanning out several responses),
interprets each human move, and regenerates stale responses after edits. The
Meta Agent watches the whole canvas through a compact outline and, gated by a
cooldown and a relevance threshold, offers advice or inserts a reflective
prompt node. Every step is recorded as an append-only AgentEvent so a session
can be audited and replayed.
"""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass, field

from .gateway import ChatMessage, ChatRequest, Gateway, GatewayError
from .graph import (
    Author,
    ConversationGraph,
    NodeId,
    NodeKind,
    NodeStatus,
    ParentNotPrompt,
    UnknownNode,
)
from .templates import PromptTemplates, load_templates
from .transcript import linearize, render_outline


class EventKind(str, enum.Enum):
    NODE_ADDED = "NodeAdded"
    NODE_EDITED = "NodeEdited"
    RESPONSES_REGENERATED = "ResponsesRegenerated"
    SELECTION_CHANGED = "SelectionChanged"
    GRAPH_INTERPRETATION = "GraphInterpretation"
    META_INTERVENTION = "MetaIntervention"


# Event kinds interpret() accepts; MetaIntervention is excluded to prevent
# the agents from reacting to their own output.
INTERPRETABLE = (
    EventKind.NODE_ADDED,
    EventKind.NODE_EDITED,
    EventKind.RESPONSES_REGENERATED,
)


@dataclass(frozen=True)
class AgentEvent:
    seq: int
    kind: EventKind
    subject: tuple[NodeId, ...]
    payload: str  # JSON object
    actor: Author

    def payload_dict(self) -> dict:
        return json.loads(self.payload)

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind.value,
            "subject": list(self.subject),
            "payload": self.payload,
            "actor": self.actor.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AgentEvent":
        return cls(
            seq=data["seq"],
            kind=EventKind(data["kind"]),
            subject=tuple(data["subject"]),
            payload=data["payload"],
            actor=Author(data["actor"]),
        )


@dataclass(frozen=True)
class GraphInterpretation:
    trigger_seq: int
    summary: str
    affected: tuple[NodeId, ...]


class InterventionKind(str, enum.Enum):
    ADVICE = "Advice"
    INSERT_PROMPT = "InsertPrompt"


@dataclass(frozen=True)
class MetaIntervention:
    kind: InterventionKind
    text: str
    attach_parents: tuple[NodeId, ...] = ()
    relevance: float = 0.0
    trigger_seq: int = 0
    new_root: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "text": self.text,
            "attach_parents": list(self.attach_parents),
            "relevance": self.relevance,
            "trigger_seq": self.trigger_seq,
            "new_root": self.new_root,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetaIntervention":
        return cls(
            kind=InterventionKind(data["kind"]),
            text=data["text"],
            attach_parents=tuple(data["attach_parents"]),
            relevance=data["relevance"],
            trigger_seq=data["trigger_seq"],
            new_root=data.get("new_root", False),
        )


@dataclass(frozen=True)
class InterventionPolicy:
    cooldown_actions: int = 3
    relevance_threshold: float = 0.5
    auto_respond_to_inserted: bool = False

    def to_dict(self) -> dict:
        return {
            "cooldown_actions": self.cooldown_actions,
            "relevance_threshold": self.relevance_threshold,
            "auto_respond_to_inserted": self.auto_respond_to_inserted,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InterventionPolicy":
        return cls(**data)


@dataclass(frozen=True)
class MetaGuidance:
    text: str
    issued_seq: int


# Actions offered for a selection, mirrored by the UI's buttons.
ADD_ROOT = "AddRoot"
BUILD_FROM = "BuildFrom"
MERGE = "Merge"
EDIT = "Edit"
SHOW_FULL_TEXT = "ShowFullText"


def selection_affordances(graph: ConversationGraph, selected: list[NodeId]) -> list[str]:
    for nid in selected:
        if nid not in graph.nodes:
            raise UnknownNode(nid)
    if not selected:
        return [ADD_ROOT]
    kinds = [graph.nodes[nid].kind for nid in selected]
    if len(selected) == 1:
        if kinds[0] is NodeKind.ASSISTANT_RESPONSE:
            return [BUILD_FROM, EDIT, SHOW_FULL_TEXT]
        return [EDIT, SHOW_FULL_TEXT]
    if all(k is NodeKind.ASSISTANT_RESPONSE for k in kinds):
        return [MERGE]
    return []


def parse_meta_reply(reply: str) -> dict:
    """Parse the Meta Agent's structured reply. Any parsing failure yields
    relevance 0 so a malformed reply suppresses the intervention."""
    try:
        obj = json.loads(reply)
        if not isinstance(obj, dict):
            raise ValueError("not an object")
        relevance = float(obj["relevance"])
        if not (0.0 <= relevance <= 1.0):
            raise ValueError("relevance out of range")
        kind = (
            InterventionKind.INSERT_PROMPT
            if obj.get("kind") == "insert_prompt"
            else InterventionKind.ADVICE
        )
        text = str(obj.get("text", ""))
        if not text:
            raise ValueError("empty text")
        parents = obj.get("parents", [])
        if parents != "tips" and not isinstance(parents, list):
            raise ValueError("bad parents")
        return {
            "relevance": relevance,
            "kind": kind,
            "text": text,
            "parents": parents,
            "new_root": bool(obj.get("new_root", False)),
        }
    except (ValueError, KeyError, TypeError):
        return {
            "relevance": 0.0,
            "kind": InterventionKind.ADVICE,
            "text": reply,
            "parents": [],
            "new_root": False,
        }


@dataclass
class ModelSettings:
    model: str = "default"
    temperature: float = 0.0
    max_tokens: int = 1024


class Orchestrator:
    """Serialized event loop for one graph session.

    All mutations flow through one lock; gateway calls happen inside it so
    the event log is a total order of the session.
    """

    def __init__(
        self,
        graph: ConversationGraph,
        gateway: Gateway,
        policy: InterventionPolicy | None = None,
        templates: PromptTemplates | None = None,
        model: ModelSettings | None = None,
    ):
        self.graph = graph
        self.gateway = gateway
        self.policy = policy or InterventionPolicy()
        self.templates = templates or load_templates()
        self.model = model or ModelSettings()
        self.events: list[AgentEvent] = []
        self.guidance: MetaGuidance | None = None
        self.mailbox: list[GraphInterpretation] = []
        self.pending_intervention: MetaIntervention | None = None
        self.advice_feed: list[MetaIntervention] = []
        self._lock = threading.RLock()

    # -- event log ---------------------------------------------------------

    def _emit(self, kind: EventKind, subject: list[NodeId], payload: dict, actor: Author) -> AgentEvent:
        event = AgentEvent(
            seq=len(self.events) + 1,
            kind=kind,
            subject=tuple(subject),
            payload=json.dumps(payload, sort_keys=True, ensure_ascii=False),
            actor=actor,
        )
        self.events.append(event)
        return event

    def _last_human_event(self) -> AgentEvent | None:
        for event in reversed(self.events):
            if event.actor is Author.HUMAN and event.kind in INTERPRETABLE:
                return event
        return None

    def _request(self, messages: list[ChatMessage]) -> ChatRequest:
        return ChatRequest(
            messages=tuple(messages),
            model=self.model.model,
            temperature=self.model.temperature,
            max_tokens=self.model.max_tokens,
        )

    # -- Graph Agent ---------------------------------------------------------

    def _system_message(self, guidance: MetaGuidance | None) -> ChatMessage:
        block = ""
        if guidance is not None:
            block = f"\nHigh-level guidance from the Meta Agent:\n{guidance.text}\n"
        return ChatMessage("system", self.templates.render("graph_agent_system", guidance=block))

    def respond(
        self,
        prompt: NodeId,
        fanout: int = 1,
        guidance: MetaGuidance | None = None,
        trigger: AgentEvent | None = None,
        interpret_after: bool = True,
    ) -> list[NodeId]:
        """Generate `fanout` responses for a prompt node.

        Each response is created Pending, then flipped to Fresh with the
        gateway's text, or to Error on gateway failure (siblings unaffected).
        """
        if fanout < 1:
            raise ValueError("fanout must be >= 1")
        with self._lock:
            if prompt not in self.graph.nodes:
                raise UnknownNode(prompt)
            if not self.graph.nodes[prompt].kind.is_prompt:
                raise ParentNotPrompt(prompt)
            guidance = guidance if guidance is not None else self.guidance
            transcript = linearize(self.graph, prompt)
            messages = [self._system_message(guidance)] + [
                ChatMessage(e.role, e.text) for e in transcript.entries
            ]
            request = self._request(messages)
            created: list[NodeId] = []
            for _ in range(fanout):
                nid = self.graph.add_response(prompt, "", NodeStatus.PENDING)
                created.append(nid)
                self._emit(
                    EventKind.NODE_ADDED,
                    [nid],
                    {"action": "response", "node": nid, "status": "Pending"},
                    Author.GRAPH_AGENT,
                )
                node = self.graph.nodes[nid]
                try:
                    node.text = self.gateway.complete(request)
                    node.status = NodeStatus.FRESH
                except GatewayError as exc:
                    node.status = NodeStatus.ERROR
                    self._emit(
                        EventKind.NODE_EDITED,
                        [nid],
                        {"action": "status", "node": nid, "status": "Error", "error": str(exc)},
                        Author.GRAPH_AGENT,
                    )
                    continue
                self._emit(
                    EventKind.NODE_EDITED,
                    [nid],
                    {"action": "status", "node": nid, "status": "Fresh"},
                    Author.GRAPH_AGENT,
                )
            if interpret_after:
                trigger = trigger or self._last_human_event()
                if trigger is not None:
                    self.interpret(trigger)
            return created

    def regenerate_stale(self) -> list[NodeId]:
        """Re-send every Stale response in topological order, so downstream
        regenerations see upstream regenerated text. A failed node halts
        regeneration of its own descendants only."""
        with self._lock:
            stale = sorted(
                (
                    nid
                    for nid, n in self.graph.nodes.items()
                    if n.kind is NodeKind.ASSISTANT_RESPONSE and n.status is NodeStatus.STALE
                ),
                key=lambda nid: self.graph.nodes[nid].created_at,
            )
            if not stale:
                return []
            failed: set[NodeId] = set()
            regenerated: list[NodeId] = []
            for nid in stale:
                if self.graph.ancestors(nid) & failed:
                    continue  # stays Stale below the failure
                node = self.graph.nodes[nid]
                transcript = linearize(self.graph, node.parents[0])
                messages = [self._system_message(self.guidance)] + [
                    ChatMessage(e.role, e.text) for e in transcript.entries
                ]
                try:
                    node.text = self.gateway.complete(self._request(messages))
                    node.status = NodeStatus.FRESH
                    regenerated.append(nid)
                except GatewayError:
                    node.status = NodeStatus.ERROR  # keeps its last Fresh text
                    failed.add(nid)
            self._emit(
                EventKind.RESPONSES_REGENERATED,
                regenerated,
                {"regenerated": regenerated, "failed": sorted(failed)},
                Author.GRAPH_AGENT,
            )
            return regenerated

    def interpret(self, event: AgentEvent) -> GraphInterpretation | None:
        """Summarize a structural move and forward it to the Meta mailbox.

        Only node additions, edits, and regenerations are interpretable;
        passing a MetaIntervention event is a caller bug (self-excitation).
        """
        if event.kind not in INTERPRETABLE:
            raise ValueError(f"event kind {event.kind.value} is not interpretable")
        with self._lock:
            outline = render_outline(self.graph).render()
            summary_in = (
                f"seq {event.seq}: {event.kind.value} by {event.actor.value}"
                f" on [{', '.join(event.subject)}] payload {event.payload}"
            )
            content = self.templates.render(
                "graph_interpreter", outline=outline, event_summary=summary_in
            )
            try:
                reply = self.gateway.complete(self._request([ChatMessage("user", content)]))
            except GatewayError:
                return None  # interpretation skipped
            interpretation = GraphInterpretation(
                trigger_seq=event.seq, summary=reply, affected=event.subject
            )
            self.mailbox.append(interpretation)
            self._emit(
                EventKind.GRAPH_INTERPRETATION,
                list(event.subject),
                {"trigger_seq": event.seq, "summary": reply},
                Author.GRAPH_AGENT,
            )
            return interpretation

    # -- Meta Agent ----------------------------------------------------------

    def _human_actions_since_last_intervention(self) -> int:
        count = 0
        for event in reversed(self.events):
            if event.kind is EventKind.META_INTERVENTION:
                break
            if event.actor is Author.HUMAN:
                count += 1
        return count

    def meta_review(self) -> MetaIntervention | None:
        """Gated review of the whole canvas. Returns an intervention only
        when the cooldown has elapsed and the model's self-rated relevance
        clears the threshold."""
        with self._lock:
            if self.pending_intervention is not None:
                return None
            if self._human_actions_since_last_intervention() < self.policy.cooldown_actions:
                return None
            outline = render_outline(self.graph).render()
            recent = "\n".join(i.summary for i in self.mailbox[-5:]) or "(none yet)"
            content = self.templates.render(
                "meta_reviewer", outline=outline, event_summary=recent
            )
            try:
                reply = self.gateway.complete(self._request([ChatMessage("user", content)]))
            except GatewayError:
                return None
            parsed = parse_meta_reply(reply)
            if parsed["relevance"] < self.policy.relevance_threshold:
                return None
            parents = parsed["parents"]
            if parents == "tips":
                parents = self.graph.response_tips()
            kind = parsed["kind"]
            if kind is InterventionKind.INSERT_PROMPT and not parents and not parsed["new_root"]:
                kind = InterventionKind.ADVICE  # nowhere to attach; stay restrained
            trigger_seq = self.events[-1].seq if self.events else 0
            intervention = MetaIntervention(
                kind=kind,
                text=parsed["text"],
                attach_parents=tuple(parents),
                relevance=parsed["relevance"],
                trigger_seq=trigger_seq,
                new_root=parsed["new_root"],
            )
            self.guidance = MetaGuidance(text=intervention.text, issued_seq=trigger_seq)
            return intervention

    def apply_intervention(self, intervention: MetaIntervention) -> NodeId | None:
        """Advice lands in the sidebar feed; InsertPrompt adds an AgentPrompt
        node. Validation happens before any mutation or event (atomicity)."""
        with self._lock:
            if intervention.kind is InterventionKind.ADVICE:
                self.advice_feed.append(intervention)
                self._emit(
                    EventKind.META_INTERVENTION,
                    [],
                    {"disposition": "advice", "intervention": intervention.to_dict()},
                    Author.META_AGENT,
                )
                if self.pending_intervention == intervention:
                    self.pending_intervention = None
                return None
            if intervention.new_root:
                nid = self.graph.add_root_prompt(intervention.text, Author.META_AGENT)
            else:
                nid = self.graph.add_prompt(
                    list(intervention.attach_parents), intervention.text, Author.META_AGENT
                )
            if self.pending_intervention == intervention:
                self.pending_intervention = None
            self._emit(
                EventKind.META_INTERVENTION,
                [nid],
                {
                    "disposition": "applied",
                    "intervention": intervention.to_dict(),
                    "node": nid,
                },
                Author.META_AGENT,
            )
            self._emit(
                EventKind.NODE_ADDED,
                [nid],
                {"action": "insert_prompt", "node": nid},
                Author.META_AGENT,
            )
            if self.policy.auto_respond_to_inserted:
                self.respond(nid, 1, interpret_after=False)
            return nid

    def dismiss_pending(self) -> None:
        if self.pending_intervention is None:
            raise ValueError("no pending intervention")
        with self._lock:
            intervention = self.pending_intervention
            self.pending_intervention = None
            self._emit(
                EventKind.META_INTERVENTION,
                [],
                {"disposition": "dismissed", "intervention": intervention.to_dict()},
                Author.HUMAN,
            )

    def accept_pending(self) -> NodeId | None:
        if self.pending_intervention is None:
            raise ValueError("no pending intervention")
        return self.apply_intervention(self.pending_intervention)

    def _meta_cycle(self) -> MetaIntervention | None:
        intervention = self.meta_review()
        if intervention is None:
            return None
        if (
            intervention.kind is InterventionKind.ADVICE
            or self.policy.auto_respond_to_inserted
        ):
            self.apply_intervention(intervention)
        else:
            self.pending_intervention = intervention
        return intervention

    # -- human actions (the session surface) ----------------------------------

    def user_add_root(self, text: str, fanout: int = 1) -> dict:
        with self._lock:
            nid = self.graph.add_root_prompt(text, Author.HUMAN)
            event = self._emit(
                EventKind.NODE_ADDED,
                [nid],
                {"action": "add_root", "node": nid, "text": text, "fanout": fanout},
                Author.HUMAN,
            )
            responses = self.respond(nid, fanout, trigger=event)
            self._meta_cycle()
            return {"node": nid, "responses": responses}

    def user_add_prompt(self, parents: list[NodeId], text: str, fanout: int = 1) -> dict:
        """BuildFrom (one parent) or Merge (several parents)."""
        with self._lock:
            nid = self.graph.add_prompt(parents, text, Author.HUMAN)
            event = self._emit(
                EventKind.NODE_ADDED,
                [nid],
                {
                    "action": "add_prompt",
                    "node": nid,
                    "parents": list(parents),
                    "text": text,
                    "fanout": fanout,
                },
                Author.HUMAN,
            )
            responses = self.respond(nid, fanout, trigger=event)
            self._meta_cycle()
            return {"node": nid, "responses": responses}

    def user_edit_text(self, node: NodeId, new_text: str) -> dict:
        with self._lock:
            stale = self.graph.edit_text(node, new_text)
            event = self._emit(
                EventKind.NODE_EDITED,
                [node],
                {"action": "edit_text", "node": node, "text": new_text},
                Author.HUMAN,
            )
            regenerated = self.regenerate_stale() if stale else []
            self.interpret(event)
            self._meta_cycle()
            return {"node": node, "stale": stale, "regenerated": regenerated}

    def user_set_position(self, node: NodeId, x: float, y: float) -> dict:
        with self._lock:
            self.graph.set_position(node, x, y)
            self._emit(
                EventKind.NODE_EDITED,
                [node],
                {"action": "set_position", "node": node, "x": x, "y": y},
                Author.HUMAN,
            )
            return {"node": node}

    def user_select(self, nodes: list[NodeId]) -> list[str]:
        with self._lock:
            affordances = selection_affordances(self.graph, nodes)
            self._emit(
                EventKind.SELECTION_CHANGED,
                nodes,
                {"action": "select", "nodes": list(nodes)},
                Author.HUMAN,
            )
            return affordances
