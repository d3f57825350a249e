"""chatgrapht: a multi-root, mergeable conversation DAG for LLM dialogue,
with deterministic context assembly and a two-agent orchestration loop."""

from .graph import (
    Author,
    ConversationGraph,
    Node,
    NodeId,
    NodeKind,
    NodeStatus,
    Violation,
    create_graph,
)
from .transcript import GraphOutline, Transcript, ancestor_closure, linearize, render_outline
from .gateway import (
    ChatMessage,
    ChatRequest,
    MockRule,
    MockScript,
    OpenAIChatGateway,
    RecordingGateway,
    ReplayGateway,
    ScriptedGateway,
    record_replay,
    request_fingerprint,
)
from .orchestrator import (
    AgentEvent,
    EventKind,
    GraphInterpretation,
    InterventionKind,
    InterventionPolicy,
    MetaGuidance,
    MetaIntervention,
    Orchestrator,
    selection_affordances,
)
from .persistence import (
    EventLog,
    SessionHeader,
    graph_from_document,
    graph_to_document,
    load_event_log,
    load_graph,
    replay,
    save_event_log,
    save_graph,
)

__version__ = "0.1.0"
