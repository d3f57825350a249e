import { describe, expect, it } from "vitest";

import {
  MAX_ZOOM,
  MIN_ZOOM,
  clampZoom,
  initialView,
  panBy,
  reconcileSelection,
  selectNode,
  setZoom,
  zoomAt,
} from "../src/view";
import type { GraphDocument } from "../src/types";

describe("zoom clamping", () => {
  it("clamps a zoom request of 10.0 down to 4.0", () => {
    expect(setZoom(initialView(), 10.0).zoom).toBe(4.0);
  });

  it("clamps below the floor", () => {
    expect(setZoom(initialView(), 0.0001).zoom).toBe(MIN_ZOOM);
  });

  it("passes values inside the range through", () => {
    for (const z of [0.1, 0.5, 1.0, 2.5, 4.0]) {
      expect(clampZoom(z)).toBe(z);
    }
  });

  it("repeated wheel zoom never escapes the range", () => {
    let view = initialView();
    for (let i = 0; i < 100; i++) view = zoomAt(view, 1.3, { x: 10, y: 10 });
    expect(view.zoom).toBe(MAX_ZOOM);
    for (let i = 0; i < 200; i++) view = zoomAt(view, 0.7, { x: 10, y: 10 });
    expect(view.zoom).toBe(MIN_ZOOM);
  });

  it("zoomAt keeps the cursor point fixed", () => {
    const view = { pan: { x: 20, y: -10 }, zoom: 1.0, selection: [] };
    const cursor = { x: 100, y: 50 };
    const worldBefore = {
      x: (cursor.x - view.pan.x) / view.zoom,
      y: (cursor.y - view.pan.y) / view.zoom,
    };
    const zoomed = zoomAt(view, 2.0, cursor);
    const worldAfter = {
      x: (cursor.x - zoomed.pan.x) / zoomed.zoom,
      y: (cursor.y - zoomed.pan.y) / zoomed.zoom,
    };
    expect(worldAfter.x).toBeCloseTo(worldBefore.x);
    expect(worldAfter.y).toBeCloseTo(worldBefore.y);
  });
});

describe("selection", () => {
  const snapshot: GraphDocument = {
    schema_version: 1,
    title: "t",
    roots: ["n000001"],
    nodes: [
      {
        id: "n000001",
        kind: "UserPrompt",
        author: "Human",
        text: "q",
        created_at: 1,
        status: "Fresh",
        position: [0, 0],
        parents: [],
      },
    ],
  };

  it("plain click replaces, shift-click toggles", () => {
    let view = selectNode(initialView(), "a", false);
    expect(view.selection).toEqual(["a"]);
    view = selectNode(view, "b", true);
    expect(view.selection).toEqual(["a", "b"]);
    view = selectNode(view, "a", true);
    expect(view.selection).toEqual(["b"]);
    view = selectNode(view, "c", false);
    expect(view.selection).toEqual(["c"]);
  });

  it("reconcile drops ids missing from the snapshot", () => {
    const view = { ...initialView(), selection: ["n000001", "gone"] };
    expect(reconcileSelection(view, snapshot).selection).toEqual(["n000001"]);
  });

  it("panBy accumulates", () => {
    const view = panBy(panBy(initialView(), 5, -3), -2, 10);
    expect(view.pan).toEqual({ x: 3, y: 7 });
  });
});
