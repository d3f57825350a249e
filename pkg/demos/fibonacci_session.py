"""Walk a two-root session into a merge, let the Meta Agent extend the
pattern, and verify the event log replays to the saved graph.

Run: python3 demos/fibonacci_session.py
"""

import json
import tempfile
from pathlib import Path

from chatgrapht import (
    EventLog,
    InterventionPolicy,
    MockRule,
    MockScript,
    Orchestrator,
    ScriptedGateway,
    SessionHeader,
    create_graph,
    render_outline,
    replay,
    save_graph,
)


def gateway():
    rules = [
        MockRule(
            "Meta Agent overseeing",
            json.dumps({"kind": "insert_prompt", "text": "3+5", "parents": "tips"}),
            0.9,
        ),
        MockRule("2+3", "5"),
        MockRule("1+2", "3"),
        MockRule("1+1", "2"),
    ]
    return ScriptedGateway(MockScript(rules=rules, default_reply="noted"))


def main():
    policy = InterventionPolicy(cooldown_actions=3, relevance_threshold=0.5)
    orch = Orchestrator(create_graph("fibonacci"), gateway(), policy=policy)

    a = orch.user_add_root("1+1")
    b = orch.user_add_root("1+2")
    orch.user_add_prompt([a["responses"][0], b["responses"][0]], "2+3")

    print("Pending intervention:", orch.pending_intervention.text)
    inserted = orch.accept_pending()
    print("Accepted as", inserted, "with parents", orch.graph.nodes[inserted].parents)

    print("\nGraph outline:")
    print(render_outline(orch.graph).render())

    with tempfile.TemporaryDirectory() as tmp:
        final = Path(tmp) / "final.json"
        save_graph(orch.graph, final)
        log = EventLog(
            SessionHeader(title="fibonacci", policy=policy, model=orch.model),
            orch.events,
        )
        replayed = Path(tmp) / "replayed.json"
        save_graph(replay(log, gateway()), replayed)
        same = replayed.read_bytes() == final.read_bytes()
    print("\nReplay byte-identical to final save:", same)


if __name__ == "__main__":
    main()
