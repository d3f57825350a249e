import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chatgrapht.graph import (
    Author,
    DuplicateParent,
    EmptyText,
    Node,
    NodeKind,
    NodeStatus,
    ParentNotPrompt,
    ParentNotResponse,
    UnknownNode,
    UnknownParent,
    create_graph,
)
from chatgrapht.transcript import linearize

from conftest import build_random_graph, oracle_descendants


class TestCreateGraph:
    def test_empty(self):
        g = create_graph("scratch")
        assert len(g.nodes) == 0
        assert g.roots == []
        assert g.schema_version == 1

    def test_default_title(self):
        assert create_graph("").title == "untitled"

    def test_empty_graph_validates(self):
        assert create_graph("x").validate() == []


class TestAddRootPrompt:
    def test_two_roots_no_edges(self):
        g = create_graph("canvas")
        g.add_root_prompt("first graph")
        g.add_root_prompt("second graph")
        assert len(g.roots) == 2
        assert all(not n.parents for n in g.nodes.values())

    def test_single_root_kind(self):
        g = create_graph("practice")
        n1 = g.add_root_prompt("How can I improve my design practice?")
        assert g.roots == [n1]
        assert g.nodes[n1].kind is NodeKind.USER_PROMPT

    def test_empty_text(self):
        with pytest.raises(EmptyText):
            create_graph("x").add_root_prompt("")

    def test_meta_author_makes_agent_prompt(self):
        g = create_graph("x")
        n = g.add_root_prompt("reflect on this", Author.META_AGENT)
        assert g.nodes[n].kind is NodeKind.AGENT_PROMPT


class TestAddPrompt:
    def test_merge_two_responses(self, diamond):
        g, p1, r1a, r1b, p2 = diamond
        assert g.nodes[p2].parents == [r1a, r1b]
        assert g.validate() == []

    def test_branching_siblings(self, chain):
        g, p1, r1, p2, r2 = chain
        sibling = g.add_prompt([r1], "alternative question")
        assert set(g.children(r1)) == {p2, sibling}

    def test_parent_not_response(self, chain):
        g, p1, *_ = chain
        with pytest.raises(ParentNotResponse):
            g.add_prompt([p1], "bad")

    def test_duplicate_parent(self, chain):
        g, _, r1, _, _ = chain
        with pytest.raises(DuplicateParent):
            g.add_prompt([r1, r1], "bad")

    def test_unknown_parent(self):
        with pytest.raises(UnknownParent):
            create_graph("x").add_prompt(["n999999"], "bad")

    def test_new_node_has_no_descendants(self, chain):
        g, _, r1, _, _ = chain
        nid = g.add_prompt([r1], "fresh branch")
        assert g.descendants(nid) == set()


class TestAddResponse:
    def test_fanout(self):
        g = create_graph("x")
        p = g.add_root_prompt("pick a view")
        a = g.add_response(p, "view one")
        b = g.add_response(p, "view two")
        assert set(g.children(p)) == {a, b}
        assert a != b

    def test_minimal_chain(self):
        g = create_graph("x")
        p = g.add_root_prompt("q")
        r = g.add_response(p, "a")
        assert g.nodes[r].parents == [p]
        assert len(g.nodes) == 2

    def test_unknown_prompt(self):
        with pytest.raises(UnknownParent):
            create_graph("x").add_response("n000042", "a")

    def test_parent_not_prompt(self, chain):
        g, _, r1, _, _ = chain
        with pytest.raises(ParentNotPrompt):
            g.add_response(r1, "bad")


class TestEditText:
    def test_chain_invalidation_order(self, chain):
        g, p1, r1, p2, r2 = chain
        stale = g.edit_text(p1, "rephrased question")
        assert stale == [r1, r2]
        assert g.nodes[r1].status is NodeStatus.STALE
        assert g.nodes[r2].status is NodeStatus.STALE
        assert g.nodes[p1].text == "rephrased question"

    def test_leaf_prompt_no_invalidation(self, chain):
        g, *_ , p2, r2 = chain
        leaf = g.add_prompt([r2], "open question")
        assert g.edit_text(leaf, "still open") == []

    def test_structure_unchanged(self, diamond):
        g, p1, r1a, r1b, p2 = diamond
        before = {nid: list(n.parents) for nid, n in g.nodes.items()}
        g.edit_text(p1, "restart")
        assert {nid: list(n.parents) for nid, n in g.nodes.items()} == before

    def test_empty_text(self, chain):
        g, p1, *_ = chain
        with pytest.raises(EmptyText):
            g.edit_text(p1, "")

    def test_unknown_node(self):
        with pytest.raises(UnknownNode):
            create_graph("x").edit_text("n000001", "t")

    @pytest.mark.parametrize("seed", range(20))
    def test_edit_exactness_vs_oracle(self, seed):
        rng = random.Random(seed)
        g = build_random_graph(rng, max_nodes=50)
        node = rng.choice(sorted(g.nodes))
        stale = g.edit_text(node, "edited")
        expected = {
            d
            for d in oracle_descendants(g, node)
            if g.nodes[d].kind is NodeKind.ASSISTANT_RESPONSE
        }
        assert set(stale) == expected
        # topological: upstream stale responses come first
        index = {nid: i for i, nid in enumerate(stale)}
        for nid in stale:
            for other in oracle_descendants(g, nid) & set(stale):
                assert index[nid] < index[other]


class TestSetPosition:
    def test_setter(self, chain):
        g, p1, *_ = chain
        g.set_position(p1, 10.0, -5.5)
        assert g.nodes[p1].position == (10.0, -5.5)

    def test_layout_independence(self, diamond):
        g, p1, r1a, r1b, p2 = diamond
        before = linearize(g, p2)
        g.set_position(r1a, 999.0, 999.0)
        assert linearize(g, p2) == before
        assert g.validate() == []
        assert g.descendants(p1) == {r1a, r1b, p2}

    def test_unknown(self):
        with pytest.raises(UnknownNode):
            create_graph("x").set_position("n000009", 0, 0)


class TestDescendants:
    def test_leaf(self, chain):
        g, *_, r2 = chain
        assert g.descendants(r2) == set()

    def test_chain_root(self, chain):
        g, p1, r1, p2, r2 = chain
        assert g.descendants(p1) == {r1, p2, r2}

    def test_diamond(self, diamond):
        g, p1, r1a, r1b, p2 = diamond
        assert g.descendants(p1) == {r1a, r1b, p2}

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_oracle(self, seed):
        rng = random.Random(100 + seed)
        g = build_random_graph(rng, max_nodes=40)
        for nid in g.nodes:
            assert g.descendants(nid) == oracle_descendants(g, nid)


class TestValidate:
    def test_constructed_graphs_valid(self):
        for seed in range(25):
            g = build_random_graph(random.Random(seed), max_nodes=50)
            assert g.validate() == []

    def test_response_with_two_parents(self, diamond):
        g, p1, r1a, r1b, p2 = diamond
        bad = g.nodes[r1a]
        bad.parents.append(r1b)  # hand-corrupt: response with 2 parents
        rules = {v.rule for v in g.validate()}
        assert "response-single-parent" in rules

    def test_dangling_parent(self, chain):
        g, _, r1, _, _ = chain
        g.nodes[r1].parents[0] = "n424242"
        rules = {v.rule for v in g.validate()}
        assert "dangling-parent" in rules

    def test_roots_bookkeeping_detected(self, chain):
        g, p1, *_ = chain
        g.roots.clear()
        assert any(v.rule == "roots-bookkeeping" for v in g.validate())

    def test_cycle_detected(self, chain):
        g, p1, r1, p2, r2 = chain
        g.nodes[p1].parents.append(r2)  # hand-corrupt: back edge
        assert any(v.rule == "cycle" for v in g.validate())


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_random_op_sequences_preserve_invariants(seed):
    g = build_random_graph(random.Random(seed), max_nodes=30)
    assert g.validate() == []
    assert g.roots == [nid for nid, n in sorted(g.nodes.items()) if not n.parents]
