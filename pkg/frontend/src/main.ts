/**
 * Browser entry: wires the API client, event stream, view state, and the
 * pure scene renderer onto an SVG canvas with the two sidebars.
 */

import { ApiClient } from "./api";
import { subscribe, type Subscription } from "./events";
import { renderGraph, type Scene } from "./scene";
import { graphSidebar, metaSidebar } from "./sidebars";
import type { GraphDocument, SessionState } from "./types";
import {
  clearSelection,
  initialView,
  panBy,
  selectNode,
  reconcileSelection,
  zoomAt,
  type ViewState,
} from "./view";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_W = 160;
const NODE_H = 48;

export class App {
  private view: ViewState = initialView();
  private snapshot: GraphDocument | null = null;
  private state: SessionState | null = null;
  private stream: Subscription | null = null;
  private lastSeq = 0;

  constructor(
    private api: ApiClient,
    private sessionId: string,
    private root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    await this.refresh();
    this.stream = subscribe(
      this.api.eventsUrl(this.sessionId, this.lastSeq),
      (event) => {
        this.lastSeq = event.seq;
        void this.refresh();
      },
    );
    this.root.addEventListener("wheel", (e: WheelEvent) => {
      e.preventDefault();
      const factor = e.deltaY < 0 ? 1.1 : 1 / 1.1;
      this.view = zoomAt(this.view, factor, { x: e.offsetX, y: e.offsetY });
      this.draw();
    });
    let dragging = false;
    this.root.addEventListener("mousedown", () => (dragging = true));
    window.addEventListener("mouseup", () => (dragging = false));
    window.addEventListener("mousemove", (e: MouseEvent) => {
      if (!dragging) return;
      this.view = panBy(this.view, e.movementX, e.movementY);
      this.draw();
    });
  }

  stop(): void {
    this.stream?.close();
  }

  async refresh(): Promise<void> {
    this.snapshot = await this.api.getGraph(this.sessionId);
    this.state = await this.api.getState(this.sessionId);
    this.view = reconcileSelection(this.view, this.snapshot);
    this.draw();
  }

  onNodeClick(nodeId: string, multi: boolean): void {
    this.view = selectNode(this.view, nodeId, multi);
    void this.api.act(this.sessionId, {
      type: "Select",
      nodes: this.view.selection,
    });
    this.draw();
  }

  onCanvasClick(): void {
    this.view = clearSelection(this.view);
    this.draw();
  }

  private draw(): void {
    if (!this.snapshot || !this.state) return;
    const scene = renderGraph(this.snapshot, this.view);
    this.root.replaceChildren(
      this.renderLeftSidebar(),
      this.renderCanvas(scene),
      this.renderRightSidebar(),
    );
  }

  private renderCanvas(scene: Scene): SVGSVGElement {
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "canvas");
    const layer = document.createElementNS(SVG_NS, "g");
    const { x, y, scale } = scene.transform;
    layer.setAttribute("transform", `translate(${x},${y}) scale(${scale})`);
    const centers = new Map(scene.nodes.map((n) => [n.id, n]));
    for (const edge of scene.edges) {
      const from = centers.get(edge.from);
      const to = centers.get(edge.to);
      if (!from || !to) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(from.x + NODE_W / 2));
      line.setAttribute("y1", String(from.y + NODE_H));
      line.setAttribute("x2", String(to.x + NODE_W / 2));
      line.setAttribute("y2", String(to.y));
      line.setAttribute("marker-end", "url(#arrow)");
      line.setAttribute("class", "edge");
      layer.appendChild(line);
    }
    for (const node of scene.nodes) {
      const g = document.createElementNS(SVG_NS, "g");
      g.setAttribute("data-node-id", node.id);
      g.setAttribute("data-status", node.status);
      const rect = document.createElementNS(SVG_NS, "rect");
      rect.setAttribute("x", String(node.x));
      rect.setAttribute("y", String(node.y));
      rect.setAttribute("width", String(NODE_W));
      rect.setAttribute("height", String(NODE_H));
      rect.setAttribute("fill", node.fill);
      rect.setAttribute("opacity", node.status === "Stale" ? "0.4" : "1");
      if (node.dashed) rect.setAttribute("stroke-dasharray", "6 3");
      if (node.selected) rect.setAttribute("stroke", "#f5a623");
      g.appendChild(rect);
      const text = document.createElementNS(SVG_NS, "text");
      text.setAttribute("x", String(node.x + 8));
      text.setAttribute("y", String(node.y + NODE_H / 2));
      text.textContent = (node.badge === "meta" ? "◆ " : "") + node.label;
      g.appendChild(text);
      g.addEventListener("click", (e: MouseEvent) => {
        e.stopPropagation();
        this.onNodeClick(node.id, e.shiftKey);
      });
      layer.appendChild(g);
    }
    svg.appendChild(layer);
    svg.addEventListener("click", () => this.onCanvasClick());
    return svg;
  }

  private renderLeftSidebar(): HTMLElement {
    const model = graphSidebar(this.snapshot!, this.view.selection);
    const aside = document.createElement("aside");
    aside.setAttribute("class", "sidebar-graph");
    for (const affordance of model.affordances) {
      const button = document.createElement("button");
      button.textContent = affordance;
      button.dataset.affordance = affordance;
      aside.appendChild(button);
    }
    if (model.fullText) {
      const panel = document.createElement("pre");
      panel.textContent = model.fullText.text;
      aside.appendChild(panel);
    }
    if (model.pendingNodes.length > 0) {
      const status = document.createElement("p");
      status.textContent = `thinking: ${model.pendingNodes.join(", ")}`;
      aside.appendChild(status);
    }
    return aside;
  }

  private renderRightSidebar(): HTMLElement {
    const model = metaSidebar(this.state!);
    const aside = document.createElement("aside");
    aside.setAttribute("class", "sidebar-meta");
    for (const advice of model.advice) {
      const item = document.createElement("p");
      item.textContent = advice.text;
      aside.appendChild(item);
    }
    if (model.pending) {
      const offer = document.createElement("div");
      const text = document.createElement("p");
      text.textContent = model.pending.text;
      offer.appendChild(text);
      const accept = document.createElement("button");
      accept.textContent = "Accept";
      accept.addEventListener("click", () =>
        void this.api.act(this.sessionId, { type: "AcceptIntervention" }),
      );
      const dismiss = document.createElement("button");
      dismiss.textContent = "Dismiss";
      dismiss.addEventListener("click", () =>
        void this.api.act(this.sessionId, { type: "DismissIntervention" }),
      );
      offer.append(accept, dismiss);
      aside.appendChild(offer);
    }
    return aside;
  }
}

export async function mount(
  baseUrl: string,
  container: HTMLElement,
  title = "",
): Promise<App> {
  const api = new ApiClient(baseUrl);
  const sessionId = await api.createSession(title);
  const app = new App(api, sessionId, container);
  await app.start();
  return app;
}
