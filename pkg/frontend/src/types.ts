/**
 * Shared types mirroring the backend JSON schemas.
 */

export type NodeKind = "UserPrompt" | "AgentPrompt" | "AssistantResponse";
export type NodeStatus = "Pending" | "Fresh" | "Stale" | "Error";
export type Author = "Human" | "GraphAgent" | "MetaAgent";

export interface GraphNode {
  id: string;
  kind: NodeKind;
  author: Author;
  text: string;
  created_at: number;
  status: NodeStatus;
  position: [number, number];
  parents: string[];
}

export interface GraphDocument {
  schema_version: number;
  title: string;
  roots: string[];
  nodes: GraphNode[];
}

export interface AgentEvent {
  seq: number;
  kind: string;
  subject: string[];
  payload: string;
  actor: Author;
}

export interface Intervention {
  kind: "Advice" | "InsertPrompt";
  text: string;
  parents: string[];
  relevance: number;
  trigger_seq: number;
  new_root: boolean;
}

export interface SessionState {
  pending_intervention: Intervention | null;
  advice: Intervention[];
  guidance: string | null;
  event_count: number;
}

export type Action =
  | { type: "AddRoot"; text: string; fanout?: number }
  | { type: "BuildFrom"; parent: string; text: string; fanout?: number }
  | { type: "Merge"; parents: string[]; text: string; fanout?: number }
  | { type: "EditText"; node: string; text: string }
  | { type: "SetPosition"; node: string; x: number; y: number }
  | { type: "Select"; nodes: string[] }
  | { type: "AcceptIntervention" }
  | { type: "DismissIntervention" };

export interface ActionResult {
  ok: boolean;
  result: Record<string, unknown>;
}
