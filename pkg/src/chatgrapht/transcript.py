"""Deterministic context assembly.

A prompt node's transcript is its ancestor closure plus itself, in the unique
topological order that breaks ties by (created_at, id) ascending. Branches
stay isolated because only ancestors are included; merges union the parent
histories with each shared ancestor appearing once.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .graph import ConversationGraph, NodeId, NodeKind, NodeStatus, UnknownNode

PREVIEW_LIMIT = 120
AGENT_PROMPT_PREFIX = "[reflective prompt] "


class TargetNotPrompt(Exception):
    def __init__(self, node_id: NodeId):
        self.node_id = node_id
        super().__init__(f"transcript target is not a prompt node: {node_id}")


@dataclass(frozen=True)
class TranscriptEntry:
    role: str  # "user" | "assistant"
    text: str
    source: NodeId


@dataclass(frozen=True)
class Transcript:
    entries: tuple[TranscriptEntry, ...]

    @property
    def sources(self) -> tuple[NodeId, ...]:
        return tuple(e.source for e in self.entries)


@dataclass(frozen=True)
class OutlineLine:
    id: NodeId
    kind: str
    author: str
    text_preview: str
    parent_ids: tuple[NodeId, ...]


@dataclass(frozen=True)
class GraphOutline:
    lines: tuple[OutlineLine, ...]

    def render(self) -> str:
        return "\n".join(
            f"{ln.id} [{ln.kind}/{ln.author}]"
            + (f" <- {','.join(ln.parent_ids)}" if ln.parent_ids else " (root)")
            + f": {ln.text_preview}"
            for ln in self.lines
        )


def ancestor_closure(graph: ConversationGraph, node: NodeId) -> set[NodeId]:
    """Strict transitive closure over parent edges."""
    return graph.ancestors(node)


def _topo_order(graph: ConversationGraph, members: set[NodeId]) -> list[NodeId]:
    """Kahn's algorithm restricted to `members`, min-heap on (created_at, id)."""
    indeg = {
        nid: sum(1 for p in graph.nodes[nid].parents if p in members)
        for nid in members
    }
    ready = [
        (graph.nodes[nid].created_at, nid) for nid, d in indeg.items() if d == 0
    ]
    heapq.heapify(ready)
    order: list[NodeId] = []
    while ready:
        _, nid = heapq.heappop(ready)
        order.append(nid)
        for c in graph.children(nid):
            if c in indeg:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(ready, (graph.nodes[c].created_at, c))
    return order


def linearize(graph: ConversationGraph, target: NodeId) -> Transcript:
    """Build the dialogue history sent to the LLM for `target`.

    Responses that never produced text (Pending, or Error before any Fresh
    completion) are skipped; Stale/Error responses with a last-known text
    are kept so edited threads retain their history.
    """
    if target not in graph.nodes:
        raise UnknownNode(target)
    if not graph.nodes[target].kind.is_prompt:
        raise TargetNotPrompt(target)
    members = ancestor_closure(graph, target) | {target}
    entries: list[TranscriptEntry] = []
    for nid in _topo_order(graph, members):
        node = graph.nodes[nid]
        if node.kind.is_prompt:
            text = node.text
            if node.kind is NodeKind.AGENT_PROMPT:
                text = AGENT_PROMPT_PREFIX + text
            entries.append(TranscriptEntry("user", text, nid))
        else:
            if not node.text:
                continue  # no Fresh text was ever produced
            entries.append(TranscriptEntry("assistant", node.text, nid))
    return Transcript(tuple(entries))


def _preview(text: str) -> str:
    if len(text) <= PREVIEW_LIMIT:
        return text
    return text[:PREVIEW_LIMIT] + "…"


def render_outline(graph: ConversationGraph) -> GraphOutline:
    """Compact whole-graph view for the Meta Agent.

    Nodes are grouped under their earliest root (roots in creation order),
    each group in (created_at, id) order; every node appears exactly once.
    """
    lines: list[OutlineLine] = []
    emitted: set[NodeId] = set()
    for root in graph.roots:
        reachable = {root} | graph.descendants(root)
        group = sorted(
            (nid for nid in reachable if nid not in emitted),
            key=lambda nid: (graph.nodes[nid].created_at, nid),
        )
        for nid in group:
            node = graph.nodes[nid]
            lines.append(
                OutlineLine(
                    id=nid,
                    kind=node.kind.value,
                    author=node.author.value,
                    text_preview=_preview(node.text),
                    parent_ids=tuple(node.parents),
                )
            )
            emitted.add(nid)
    return GraphOutline(tuple(lines))
