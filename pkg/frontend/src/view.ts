/**
 * Client-side view state: pan, zoom, and the ordered selection.
 *
 * Zoom is clamped so the canvas can neither vanish nor blow up; selection is
 * pruned against each snapshot so stale ids never drive an action.
 */

import type { GraphDocument } from "./types";

export const MIN_ZOOM = 0.1;
export const MAX_ZOOM = 4.0;

export interface ViewState {
  pan: { x: number; y: number };
  zoom: number;
  selection: string[];
}

export function initialView(): ViewState {
  return { pan: { x: 0, y: 0 }, zoom: 1.0, selection: [] };
}

export function clampZoom(zoom: number): number {
  return Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, zoom));
}

export function setZoom(view: ViewState, zoom: number): ViewState {
  return { ...view, zoom: clampZoom(zoom) };
}

/** Wheel zoom keeps the point under the cursor fixed in screen space. */
export function zoomAt(
  view: ViewState,
  factor: number,
  cursor: { x: number; y: number },
): ViewState {
  const zoom = clampZoom(view.zoom * factor);
  const applied = zoom / view.zoom;
  return {
    ...view,
    zoom,
    pan: {
      x: cursor.x - (cursor.x - view.pan.x) * applied,
      y: cursor.y - (cursor.y - view.pan.y) * applied,
    },
  };
}

export function panBy(view: ViewState, dx: number, dy: number): ViewState {
  return { ...view, pan: { x: view.pan.x + dx, y: view.pan.y + dy } };
}

/** Toggle with multi=true (shift-click); replace otherwise. */
export function selectNode(
  view: ViewState,
  nodeId: string,
  multi: boolean,
): ViewState {
  if (!multi) return { ...view, selection: [nodeId] };
  const selection = view.selection.includes(nodeId)
    ? view.selection.filter((id) => id !== nodeId)
    : [...view.selection, nodeId];
  return { ...view, selection };
}

export function clearSelection(view: ViewState): ViewState {
  return { ...view, selection: [] };
}

/** Drops selected ids that no longer exist in the snapshot. */
export function reconcileSelection(
  view: ViewState,
  snapshot: GraphDocument,
): ViewState {
  const ids = new Set(snapshot.nodes.map((n) => n.id));
  const selection = view.selection.filter((id) => ids.has(id));
  return selection.length === view.selection.length
    ? view
    : { ...view, selection };
}
