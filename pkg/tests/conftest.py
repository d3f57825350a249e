"""Shared fixtures and independent oracles.

The oracles deliberately avoid the library's derived indexes: they recompute
reachability from the raw `parents` lists alone, so structural tests check
the implementation against a second route.
"""

from __future__ import annotations

import itertools
import random

import pytest

from chatgrapht.graph import (
    Author,
    ConversationGraph,
    NodeKind,
    create_graph,
)


# -- oracles -------------------------------------------------------------------


def oracle_child_map(graph: ConversationGraph) -> dict[str, set[str]]:
    children: dict[str, set[str]] = {nid: set() for nid in graph.nodes}
    for nid, node in graph.nodes.items():
        for p in node.parents:
            children[p].add(nid)
    return children


def oracle_descendants(graph: ConversationGraph, start: str) -> set[str]:
    children = oracle_child_map(graph)
    seen: set[str] = set()
    frontier = set(children[start])
    while frontier:
        seen |= frontier
        frontier = set().union(*(children[n] for n in frontier)) - seen
    return seen


def oracle_ancestors(graph: ConversationGraph, start: str) -> set[str]:
    seen: set[str] = set()
    frontier = set(graph.nodes[start].parents)
    while frontier:
        seen |= frontier
        frontier = set().union(*(graph.nodes[n].parents for n in frontier)) - seen
    return seen


def all_topological_orders(graph: ConversationGraph, members: set[str]) -> list[list[str]]:
    """Every topological order of the induced subgraph (exponential; keep small)."""
    edges = [
        (p, nid)
        for nid in members
        for p in graph.nodes[nid].parents
        if p in members
    ]
    orders = []
    for perm in itertools.permutations(sorted(members)):
        index = {nid: i for i, nid in enumerate(perm)}
        if all(index[u] < index[v] for u, v in edges):
            orders.append(list(perm))
    return orders


# -- random graph construction ---------------------------------------------------


def build_random_graph(rng: random.Random, max_nodes: int = 30) -> ConversationGraph:
    """Grow a graph through the public ops only: roots, branches, merges, fan-out."""
    graph = create_graph(f"random-{rng.randrange(10**6)}")
    target = rng.randint(1, max_nodes)
    graph.add_root_prompt(f"root {rng.randrange(1000)}")
    while len(graph.nodes) < target:
        responses = [
            nid
            for nid, n in graph.nodes.items()
            if n.kind is NodeKind.ASSISTANT_RESPONSE
        ]
        prompts = [nid for nid, n in graph.nodes.items() if n.kind.is_prompt]
        move = rng.random()
        if move < 0.15 or not responses:
            graph.add_root_prompt(f"root {rng.randrange(1000)}")
        elif move < 0.55:
            graph.add_response(rng.choice(prompts), f"reply {rng.randrange(1000)}")
        elif move < 0.85:
            graph.add_prompt([rng.choice(responses)], f"prompt {rng.randrange(1000)}")
        else:
            k = min(len(responses), rng.randint(2, 3))
            parents = rng.sample(responses, k)
            graph.add_prompt(parents, f"merge {rng.randrange(1000)}")
    return graph


def drive_random_session(orch, rng: random.Random, steps: int) -> None:
    """Random but replayable human session over the orchestrator surface."""
    for _ in range(steps):
        g = orch.graph
        responses = [
            nid
            for nid, n in g.nodes.items()
            if not n.kind.is_prompt and n.status.value == "Fresh"
        ]
        move = rng.random()
        if move < 0.35 or not responses:
            orch.user_add_root(f"root {rng.randrange(100)}", fanout=rng.randint(1, 2))
        elif move < 0.6:
            orch.user_add_prompt([rng.choice(responses)], f"branch {rng.randrange(100)}")
        elif move < 0.75 and len(responses) >= 2:
            orch.user_add_prompt(rng.sample(responses, 2), f"merge {rng.randrange(100)}")
        elif move < 0.9:
            node = rng.choice(sorted(g.nodes))
            orch.user_edit_text(node, f"edited {rng.randrange(100)}")
        else:
            node = rng.choice(sorted(g.nodes))
            orch.user_set_position(node, rng.uniform(-500, 500), rng.uniform(-500, 500))
        if orch.pending_intervention is not None:
            if rng.random() < 0.5:
                orch.accept_pending()
            else:
                orch.dismiss_pending()


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260823)


# -- small named shapes used across tests -----------------------------------------


@pytest.fixture
def chain():
    """P1 -> R1 -> P2 -> R2."""
    g = create_graph("chain")
    p1 = g.add_root_prompt("first question")
    r1 = g.add_response(p1, "first answer")
    p2 = g.add_prompt([r1], "second question")
    r2 = g.add_response(p2, "second answer")
    return g, p1, r1, p2, r2


@pytest.fixture
def diamond():
    """P1 -> {R1a, R1b} -> P2 (merge)."""
    g = create_graph("diamond")
    p1 = g.add_root_prompt("start")
    r1a = g.add_response(p1, "take one")
    r1b = g.add_response(p1, "take two")
    p2 = g.add_prompt([r1a, r1b], "combine both")
    return g, p1, r1a, r1b, p2


@pytest.fixture
def two_root_merge():
    """Roots A(t1), B(t3) with responses Ra(t2), Rb(t4), merge M(t5)."""
    g = create_graph("figure-five")
    a = g.add_root_prompt("1+1")
    ra = g.add_response(a, "2")
    b = g.add_root_prompt("1+2")
    rb = g.add_response(b, "3")
    m = g.add_prompt([ra, rb], "2+3")
    return g, a, ra, b, rb, m
