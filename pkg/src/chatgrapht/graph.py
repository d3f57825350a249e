"""Conversation graph: a multi-root DAG of prompt and response nodes.

Prompts and responses strictly alternate along every edge. A response has
exactly one prompt parent; a prompt may have any number of response parents
(a merge) or none (a root). New nodes never have children at creation time,
which makes acyclicity a construction invariant rather than a runtime check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

NodeId = str

# Vertical offset applied when auto-placing a node under its first parent,
# and horizontal offset between successive roots.
CHILD_Y_OFFSET = 120.0
ROOT_X_OFFSET = 240.0


class NodeKind(str, enum.Enum):
    USER_PROMPT = "UserPrompt"
    AGENT_PROMPT = "AgentPrompt"
    ASSISTANT_RESPONSE = "AssistantResponse"

    @property
    def is_prompt(self) -> bool:
        return self is not NodeKind.ASSISTANT_RESPONSE


class Author(str, enum.Enum):
    HUMAN = "Human"
    GRAPH_AGENT = "GraphAgent"
    META_AGENT = "MetaAgent"


class NodeStatus(str, enum.Enum):
    FRESH = "Fresh"
    PENDING = "Pending"
    STALE = "Stale"
    ERROR = "Error"


class GraphError(Exception):
    """Base for all conversation-graph errors."""


class UnknownNode(GraphError):
    def __init__(self, node_id: NodeId):
        self.node_id = node_id
        super().__init__(f"unknown node: {node_id}")


class UnknownParent(GraphError):
    def __init__(self, node_id: NodeId):
        self.node_id = node_id
        super().__init__(f"unknown parent: {node_id}")


class ParentNotResponse(GraphError):
    def __init__(self, node_id: NodeId):
        self.node_id = node_id
        super().__init__(f"parent is not a response node: {node_id}")


class ParentNotPrompt(GraphError):
    def __init__(self, node_id: NodeId):
        self.node_id = node_id
        super().__init__(f"parent is not a prompt node: {node_id}")


class DuplicateParent(GraphError):
    def __init__(self, node_id: NodeId):
        self.node_id = node_id
        super().__init__(f"duplicate parent: {node_id}")


class EmptyText(GraphError):
    def __init__(self):
        super().__init__("text must be non-empty")


@dataclass
class Node:
    id: NodeId
    kind: NodeKind
    author: Author
    text: str
    created_at: int
    position: tuple[float, float]
    status: NodeStatus
    parents: list[NodeId] = field(default_factory=list)


@dataclass(frozen=True)
class Violation:
    """A named invariant breach with the node(s) involved."""

    rule: str
    nodes: tuple[NodeId, ...]

    def __str__(self) -> str:
        return f"{self.rule}: {', '.join(self.nodes)}"


class ConversationGraph:
    """Mutable conversation DAG. All mutation goes through the op methods.

    Single-writer: callers serialize mutations per graph; reads of a
    consistent snapshot may run in parallel.
    """

    schema_version = 1

    def __init__(self, title: str = "untitled"):
        self.title = title or "untitled"
        self.nodes: dict[NodeId, Node] = {}
        self.roots: list[NodeId] = []
        self.next_seq = 1
        # child index, derived from parents lists
        self._children: dict[NodeId, list[NodeId]] = {}

    # -- id / placement helpers ------------------------------------------

    def _new_id(self) -> tuple[NodeId, int]:
        seq = self.next_seq
        self.next_seq += 1
        return f"n{seq:06d}", seq

    def _auto_position(self, parents: list[NodeId]) -> tuple[float, float]:
        if parents:
            px, py = self.nodes[parents[0]].position
            return (px, py + CHILD_Y_OFFSET)
        return (ROOT_X_OFFSET * len(self.roots), 0.0)

    def _insert(self, node: Node) -> NodeId:
        self.nodes[node.id] = node
        self._children[node.id] = []
        for p in node.parents:
            self._children[p].append(node.id)
        if not node.parents:
            self.roots.append(node.id)
        return node.id

    def children(self, node_id: NodeId) -> list[NodeId]:
        if node_id not in self.nodes:
            raise UnknownNode(node_id)
        return list(self._children[node_id])

    def node(self, node_id: NodeId) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    # -- operations -------------------------------------------------------

    def add_root_prompt(self, text: str, author: Author = Author.HUMAN) -> NodeId:
        if not text:
            raise EmptyText()
        kind = NodeKind.AGENT_PROMPT if author is Author.META_AGENT else NodeKind.USER_PROMPT
        nid, seq = self._new_id()
        node = Node(
            id=nid,
            kind=kind,
            author=author,
            text=text,
            created_at=seq,
            position=self._auto_position([]),
            status=NodeStatus.FRESH,
            parents=[],
        )
        return self._insert(node)

    def add_prompt(self, parents: list[NodeId], text: str, author: Author = Author.HUMAN) -> NodeId:
        if not text:
            raise EmptyText()
        if not parents:
            raise UnknownParent("<empty parent list>")
        seen: set[NodeId] = set()
        for p in parents:
            if p in seen:
                raise DuplicateParent(p)
            seen.add(p)
            if p not in self.nodes:
                raise UnknownParent(p)
            if self.nodes[p].kind is not NodeKind.ASSISTANT_RESPONSE:
                raise ParentNotResponse(p)
        kind = NodeKind.AGENT_PROMPT if author is Author.META_AGENT else NodeKind.USER_PROMPT
        nid, seq = self._new_id()
        node = Node(
            id=nid,
            kind=kind,
            author=author,
            text=text,
            created_at=seq,
            position=self._auto_position(parents),
            status=NodeStatus.FRESH,
            parents=list(parents),
        )
        return self._insert(node)

    def add_response(
        self,
        prompt: NodeId,
        text: str,
        status: NodeStatus = NodeStatus.FRESH,
        author: Author = Author.GRAPH_AGENT,
    ) -> NodeId:
        if prompt not in self.nodes:
            raise UnknownParent(prompt)
        if not self.nodes[prompt].kind.is_prompt:
            raise ParentNotPrompt(prompt)
        if status not in (NodeStatus.FRESH, NodeStatus.PENDING):
            raise ValueError(f"new responses must be Fresh or Pending, got {status}")
        if status is NodeStatus.FRESH and not text:
            raise EmptyText()
        nid, seq = self._new_id()
        node = Node(
            id=nid,
            kind=NodeKind.ASSISTANT_RESPONSE,
            author=author,
            text=text,
            created_at=seq,
            position=self._auto_position([prompt]),
            status=status,
            parents=[prompt],
        )
        return self._insert(node)

    def edit_text(self, node_id: NodeId, new_text: str) -> list[NodeId]:
        """Replace a node's text and mark every downstream response Stale.

        Returns the invalidated response ids in topological order. The node
        itself is never invalidated; structure is unchanged.
        """
        if node_id not in self.nodes:
            raise UnknownNode(node_id)
        if not new_text:
            raise EmptyText()
        self.nodes[node_id].text = new_text
        stale: list[NodeId] = []
        # creation order is a topological order: parents predate children
        for did in sorted(self.descendants(node_id), key=lambda d: self.nodes[d].created_at):
            node = self.nodes[did]
            if node.kind is NodeKind.ASSISTANT_RESPONSE:
                node.status = NodeStatus.STALE
                stale.append(did)
        return stale

    def set_position(self, node_id: NodeId, x: float, y: float) -> None:
        if node_id not in self.nodes:
            raise UnknownNode(node_id)
        self.nodes[node_id].position = (float(x), float(y))

    def descendants(self, node_id: NodeId) -> set[NodeId]:
        """Strict transitive closure over child edges."""
        if node_id not in self.nodes:
            raise UnknownNode(node_id)
        out: set[NodeId] = set()
        stack = list(self._children[node_id])
        while stack:
            cur = stack.pop()
            if cur in out:
                continue
            out.add(cur)
            stack.extend(self._children[cur])
        return out

    def ancestors(self, node_id: NodeId) -> set[NodeId]:
        """Strict transitive closure over parent edges."""
        if node_id not in self.nodes:
            raise UnknownNode(node_id)
        out: set[NodeId] = set()
        stack = list(self.nodes[node_id].parents)
        while stack:
            cur = stack.pop()
            if cur in out:
                continue
            out.add(cur)
            stack.extend(self.nodes[cur].parents)
        return out

    def response_tips(self) -> list[NodeId]:
        """Fresh leaf response nodes, in creation order."""
        return [
            nid
            for nid, n in sorted(self.nodes.items())
            if n.kind is NodeKind.ASSISTANT_RESPONSE
            and n.status is NodeStatus.FRESH
            and not self._children[nid]
        ]

    # -- validation -------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Check every structural invariant; violations are values, not errors."""
        out: list[Violation] = []
        for nid, node in self.nodes.items():
            seen: set[NodeId] = set()
            for p in node.parents:
                if p in seen:
                    out.append(Violation("duplicate-parent", (nid, p)))
                seen.add(p)
                if p not in self.nodes:
                    out.append(Violation("dangling-parent", (nid, p)))
                    continue
                parent = self.nodes[p]
                if node.kind.is_prompt == parent.kind.is_prompt:
                    out.append(Violation("alternation", (p, nid)))
            if node.kind is NodeKind.ASSISTANT_RESPONSE:
                if len(node.parents) != 1:
                    out.append(Violation("response-single-parent", (nid,)))
            else:
                if node.status is not NodeStatus.FRESH:
                    out.append(Violation("status-on-prompt", (nid,)))
                if node.kind is NodeKind.AGENT_PROMPT and node.author is not Author.META_AGENT:
                    out.append(Violation("agent-prompt-author", (nid,)))
            if node.status is NodeStatus.FRESH and not node.text:
                out.append(Violation("fresh-empty-text", (nid,)))
        expected_roots = [nid for nid, n in sorted(self.nodes.items(), key=lambda kv: kv[1].created_at) if not n.parents]
        if list(self.roots) != expected_roots:
            out.append(Violation("roots-bookkeeping", tuple(self.roots)))
        out.extend(self._check_acyclic())
        return out

    def _check_acyclic(self) -> list[Violation]:
        state: dict[NodeId, int] = {}  # 0 visiting, 1 done

        def visit(nid: NodeId) -> bool:
            if state.get(nid) == 1:
                return True
            if state.get(nid) == 0:
                return False
            state[nid] = 0
            for p in self.nodes[nid].parents:
                if p in self.nodes and not visit(p):
                    return False
            state[nid] = 1
            return True

        for nid in self.nodes:
            if not visit(nid):
                return [Violation("cycle", (nid,))]
        return []

    # -- equality (structural) ---------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConversationGraph):
            return NotImplemented
        return (
            self.title == other.title
            and self.roots == other.roots
            and self.nodes == other.nodes
        )


def create_graph(title: str = "") -> ConversationGraph:
    return ConversationGraph(title)
