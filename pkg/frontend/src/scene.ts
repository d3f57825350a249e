/**
 * Pure scene construction: same (snapshot, view) in, identical scene out.
 *
 * The canvas layer renders the returned scene verbatim; nothing here touches
 * the DOM or the network, which keeps the mapping testable node-side.
 */

import type { GraphDocument, GraphNode } from "./types";
import type { ViewState } from "./view";

export const PROMPT_FILL = "#2e9e4f"; // green
export const RESPONSE_FILL = "#2f6fd0"; // blue

export interface SceneNode {
  id: string;
  x: number;
  y: number;
  fill: string;
  dashed: boolean;
  badge: "meta" | null;
  status: GraphNode["status"];
  selected: boolean;
  label: string;
}

export interface SceneEdge {
  from: string; // parent
  to: string; // child
  directed: true;
}

export interface Scene {
  transform: { x: number; y: number; scale: number };
  nodes: SceneNode[];
  edges: SceneEdge[];
}

const LABEL_LIMIT = 48;

function label(node: GraphNode): string {
  const flat = node.text.replace(/\s+/g, " ").trim();
  return flat.length <= LABEL_LIMIT ? flat : flat.slice(0, LABEL_LIMIT) + "…";
}

export function renderGraph(snapshot: GraphDocument, view: ViewState): Scene {
  const selected = new Set(view.selection);
  const nodes: SceneNode[] = snapshot.nodes.map((node) => ({
    id: node.id,
    x: node.position[0],
    y: node.position[1],
    fill: node.kind === "AssistantResponse" ? RESPONSE_FILL : PROMPT_FILL,
    dashed: node.kind === "AgentPrompt",
    badge: node.author === "MetaAgent" ? "meta" : null,
    status: node.status,
    selected: selected.has(node.id),
    label: label(node),
  }));
  const edges: SceneEdge[] = snapshot.nodes.flatMap((node) =>
    node.parents.map((parent) => ({
      from: parent,
      to: node.id,
      directed: true as const,
    })),
  );
  return {
    transform: { x: view.pan.x, y: view.pan.y, scale: view.zoom },
    nodes,
    edges,
  };
}

/**
 * Local mirror of the backend's selection_affordances. The backend remains
 * the gate; this only decides which buttons to draw before Select resolves.
 */
export function localAffordances(
  snapshot: GraphDocument,
  selection: string[],
): string[] {
  if (selection.length === 0) return ["AddRoot"];
  const byId = new Map(snapshot.nodes.map((n) => [n.id, n]));
  const picked = selection.map((id) => byId.get(id));
  if (picked.some((n) => n === undefined)) return [];
  const nodes = picked as GraphNode[];
  if (nodes.length === 1) {
    const node = nodes[0];
    return node.kind === "AssistantResponse"
      ? ["BuildFrom", "Edit", "ShowFullText"]
      : ["Edit", "ShowFullText"];
  }
  return nodes.every((n) => n.kind === "AssistantResponse") ? ["Merge"] : [];
}
