/**
 * View models for the two sidebars.
 *
 * Left: Graph Agent conversation surface with affordance buttons and the
 * Pending work indicator. Right: Meta Agent advice feed plus Accept/Dismiss
 * controls for a pending InsertPrompt.
 */

import type { GraphDocument, SessionState } from "./types";
import { localAffordances } from "./scene";

export interface GraphSidebar {
  affordances: string[];
  pendingNodes: string[];
  staleNodes: string[];
  fullText: { nodeId: string; text: string } | null;
}

export interface MetaSidebar {
  advice: { text: string; relevance: number }[];
  guidance: string | null;
  pending: {
    text: string;
    parents: string[];
    canAccept: boolean;
    canDismiss: boolean;
  } | null;
}

export function graphSidebar(
  snapshot: GraphDocument,
  selection: string[],
): GraphSidebar {
  const single =
    selection.length === 1
      ? snapshot.nodes.find((n) => n.id === selection[0])
      : undefined;
  return {
    affordances: localAffordances(snapshot, selection),
    pendingNodes: snapshot.nodes
      .filter((n) => n.status === "Pending")
      .map((n) => n.id),
    staleNodes: snapshot.nodes
      .filter((n) => n.status === "Stale")
      .map((n) => n.id),
    fullText: single ? { nodeId: single.id, text: single.text } : null,
  };
}

export function metaSidebar(state: SessionState): MetaSidebar {
  const pending = state.pending_intervention;
  return {
    advice: state.advice.map((a) => ({ text: a.text, relevance: a.relevance })),
    guidance: state.guidance,
    pending: pending
      ? {
          text: pending.text,
          parents: pending.parents,
          canAccept: true,
          canDismiss: true,
        }
      : null,
  };
}
