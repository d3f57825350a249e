/**
 * Scripted end-to-end contract against a live backend in mock mode.
 *
 * Drives the same client code the browser runs (ApiClient, ViewState,
 * renderGraph) through AddRoot, BuildFrom, a second branch, a multi-select
 * Merge, EditText, and accepting the Meta Agent's InsertPrompt, checking the
 * rendered scene against the server snapshot after every step.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { subscribe } from "../src/events";
import { localAffordances, renderGraph } from "../src/scene";
import { metaSidebar } from "../src/sidebars";
import { initialView, selectNode, setZoom, type ViewState } from "../src/view";
import type { AgentEvent, GraphDocument } from "../src/types";
import { startBackend, type Backend } from "./backend";

let backend: Backend;
let api: ApiClient;

beforeAll(async () => {
  backend = await startBackend({ cooldown: 5, threshold: 0.5 });
  api = new ApiClient(backend.baseUrl);
}, 30000);

afterAll(() => backend?.stop());

function edgeCount(doc: GraphDocument): number {
  return doc.nodes.reduce((sum, n) => sum + n.parents.length, 0);
}

/** Renders the latest snapshot and asserts scene counts match the server. */
async function checkRender(
  sessionId: string,
  view: ViewState,
  expectedNodes: number,
  expectedEdges: number,
): Promise<GraphDocument> {
  const doc = await api.getGraph(sessionId);
  const scene = renderGraph(doc, view);
  expect(scene.nodes).toHaveLength(doc.nodes.length);
  expect(scene.edges).toHaveLength(edgeCount(doc));
  expect(doc.nodes).toHaveLength(expectedNodes);
  expect(edgeCount(doc)).toBe(expectedEdges);
  return doc;
}

/** Selects via the API and checks the local affordance mirror agrees. */
async function select(
  sessionId: string,
  view: ViewState,
  doc: GraphDocument,
  nodes: string[],
): Promise<ViewState> {
  let next = { ...view, selection: [] as string[] };
  for (const id of nodes) next = selectNode(next, id, true);
  const resp = await api.act(sessionId, { type: "Select", nodes });
  expect(resp.result.affordances).toEqual(localAffordances(doc, nodes));
  return next;
}

describe("UI contract", () => {
  it(
    "runs the scripted session with matching render counts at every step",
    { timeout: 30000 },
    async () => {
      const sessionId = await api.createSession("ui contract");
      let view = initialView();

      // empty selection shows the add-root affordance
      let doc = await checkRender(sessionId, view, 0, 0);
      expect(localAffordances(doc, [])).toEqual(["AddRoot"]);
      const selectEmpty = await api.act(sessionId, { type: "Select", nodes: [] });
      expect(selectEmpty.result.affordances).toEqual(["AddRoot"]);

      // AddRoot: prompt + one fresh response
      const root = (
        await api.act(sessionId, { type: "AddRoot", text: "first question" })
      ).result as { node: string; responses: string[] };
      doc = await checkRender(sessionId, view, 2, 1);

      // BuildFrom the response
      view = await select(sessionId, view, doc, [root.responses[0]]);
      const deeper = (
        await api.act(sessionId, {
          type: "BuildFrom",
          parent: root.responses[0],
          text: "go deeper",
        })
      ).result as { node: string; responses: string[] };
      doc = await checkRender(sessionId, view, 4, 3);

      // second branch off the same response
      view = await select(sessionId, view, doc, [root.responses[0]]);
      const wider = (
        await api.act(sessionId, {
          type: "BuildFrom",
          parent: root.responses[0],
          text: "go wider",
        })
      ).result as { node: string; responses: string[] };
      doc = await checkRender(sessionId, view, 6, 5);

      // multi-select the two branch responses and Merge
      const parents = [deeper.responses[0], wider.responses[0]];
      view = await select(sessionId, view, doc, parents);
      await api.act(sessionId, {
        type: "Merge",
        parents,
        text: "synthesize both",
      });
      doc = await checkRender(sessionId, view, 8, 8);

      // EditText on the root regenerates downstream; counts unchanged
      view = await select(sessionId, view, doc, [root.node]);
      const edited = (
        await api.act(sessionId, {
          type: "EditText",
          node: root.node,
          text: "first question, revised",
        })
      ).result as { stale: string[]; regenerated: string[] };
      expect(edited.regenerated.sort()).toEqual(edited.stale.sort());
      doc = await checkRender(sessionId, view, 8, 8);
      expect(doc.nodes.every((n) => n.status !== "Stale")).toBe(true);

      // the Meta Agent's InsertPrompt is pending after five human actions
      const state = await api.getState(sessionId);
      const meta = metaSidebar(state);
      expect(meta.pending).not.toBeNull();
      expect(meta.pending!.text).toBe("tie these threads together");

      // Accept: one dashed AgentPrompt appears with its parent edges
      const accepted = (
        await api.act(sessionId, { type: "AcceptIntervention" })
      ).result as { node: string };
      const after = await api.getGraph(sessionId);
      const insertedNode = after.nodes.find((n) => n.id === accepted.node)!;
      doc = await checkRender(
        sessionId,
        view,
        9,
        8 + insertedNode.parents.length,
      );
      const scene = renderGraph(doc, view);
      const inserted = scene.nodes.find((n) => n.id === accepted.node)!;
      expect(inserted.dashed).toBe(true);
      expect(inserted.badge).toBe("meta");

      // zoom clamps at both ends
      expect(setZoom(view, 10.0).zoom).toBe(4.0);
      expect(setZoom(view, 0.01).zoom).toBe(0.1);
    },
  );

  it("gates actions the selection does not afford", { timeout: 30000 }, async () => {
    const sessionId = await api.createSession("gating");
    const root = (
      await api.act(sessionId, { type: "AddRoot", text: "q" })
    ).result as { node: string; responses: string[] };
    await expect(
      api.act(sessionId, {
        type: "Merge",
        parents: [root.responses[0]],
        text: "m",
      }),
    ).rejects.toMatchObject({ code: "InvalidAction" });
  });

  it("live event stream delivers events in seq order", { timeout: 30000 }, async () => {
    const sessionId = await api.createSession("stream");
    const seen: AgentEvent[] = [];
    let resolveFresh: () => void;
    const sawFresh = new Promise<void>((r) => (resolveFresh = r));
    const sub = subscribe(api.eventsUrl(sessionId, 0, true), (event) => {
      seen.push(event);
      if (event.kind === "NodeEdited" && event.payload.includes("Fresh")) {
        resolveFresh();
      }
    });
    await api.act(sessionId, { type: "AddRoot", text: "hello" });
    await sawFresh;
    sub.close();
    await sub.done;
    expect(seen.map((e) => e.seq)).toEqual(seen.map((_, i) => i + 1));
    const kinds = seen.map((e) => e.kind);
    expect(kinds[0]).toBe("NodeAdded");
    const state = await api.getState(sessionId);
    expect(seen.length).toBeLessThanOrEqual(state.event_count);
  });
});
