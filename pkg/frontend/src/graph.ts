// Layered dependency-graph view: one horizontal band per layer, nodes laid
// out left to right inside their band, edges drawn from lower to higher
// bands (the service guarantees source layer < target layer).

import { DocGraph } from "./api.js";

const BAND_HEIGHT = 72;
const NODE_WIDTH = 132;
const NODE_HEIGHT = 30;
const H_GAP = 16;
const MARGIN = 14;

const SVG_NS = "http://www.w3.org/2000/svg";

interface NodePosition {
  x: number;
  y: number;
}

export function renderGraph(container: HTMLElement, graph: DocGraph | null): void {
  container.innerHTML = "";
  if (graph === null) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "no dependency graph for this document";
    container.appendChild(empty);
    return;
  }

  const byLayer = new Map<number, typeof graph.nodes>();
  for (const node of graph.nodes) {
    const bucket = byLayer.get(node.layer) ?? [];
    bucket.push(node);
    byLayer.set(node.layer, bucket);
  }
  const layers = [...byLayer.keys()].sort((a, b) => a - b);
  const widest = Math.max(1, ...[...byLayer.values()].map((ns) => ns.length));
  const width = MARGIN * 2 + widest * (NODE_WIDTH + H_GAP);
  const height = MARGIN * 2 + layers.length * BAND_HEIGHT;

  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "dep-graph");

  const positions = new Map<string, NodePosition>();
  for (const layer of layers) {
    const band = document.createElementNS(SVG_NS, "g");
    band.setAttribute("class", "layer-band");
    band.dataset.layer = String(layer);

    const bandY = MARGIN + layer * BAND_HEIGHT;
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", "0");
    rect.setAttribute("y", String(bandY - 6));
    rect.setAttribute("width", String(width));
    rect.setAttribute("height", String(BAND_HEIGHT - 10));
    rect.setAttribute("class", "band-background");
    band.appendChild(rect);

    const caption = document.createElementNS(SVG_NS, "text");
    caption.setAttribute("x", "4");
    caption.setAttribute("y", String(bandY + 10));
    caption.setAttribute("class", "band-caption");
    caption.textContent = `layer ${layer}`;
    band.appendChild(caption);

    (byLayer.get(layer) ?? []).forEach((node, i) => {
      positions.set(node.stmt_id, {
        x: MARGIN + 54 + i * (NODE_WIDTH + H_GAP),
        y: bandY + 14,
      });
    });
    svg.appendChild(band);
  }

  const edgeGroup = document.createElementNS(SVG_NS, "g");
  for (const edge of graph.edges) {
    const from = positions.get(edge.source);
    const to = positions.get(edge.target);
    if (!from || !to) continue;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(from.x + NODE_WIDTH / 2));
    line.setAttribute("y1", String(from.y + NODE_HEIGHT));
    line.setAttribute("x2", String(to.x + NODE_WIDTH / 2));
    line.setAttribute("y2", String(to.y));
    line.setAttribute("class", "dep-edge");
    line.dataset.source = edge.source;
    line.dataset.target = edge.target;
    edgeGroup.appendChild(line);
  }
  svg.appendChild(edgeGroup);

  for (const node of graph.nodes) {
    const pos = positions.get(node.stmt_id)!;
    const g = document.createElementNS(SVG_NS, "g");
    g.setAttribute("class", `graph-node kind-${node.kind}`);
    g.dataset.stmtId = node.stmt_id;

    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(pos.x));
    rect.setAttribute("y", String(pos.y));
    rect.setAttribute("width", String(NODE_WIDTH));
    rect.setAttribute("height", String(NODE_HEIGHT));
    rect.setAttribute("rx", "5");
    g.appendChild(rect);

    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(pos.x + NODE_WIDTH / 2));
    text.setAttribute("y", String(pos.y + NODE_HEIGHT / 2 + 4));
    text.setAttribute("text-anchor", "middle");
    text.textContent = node.label ?? node.stmt_id;
    g.appendChild(text);

    svg.appendChild(g);
  }

  container.appendChild(svg);
}

// Selecting a node highlights it and its direct prerequisites.
export function highlightNode(container: HTMLElement, graph: DocGraph, stmtId: string): void {
  const direct = new Set(
    graph.edges.filter((e) => e.target === stmtId).map((e) => e.source),
  );
  container.querySelectorAll<SVGGElement>(".graph-node").forEach((node) => {
    node.classList.remove("selected", "direct-dep");
    const id = node.dataset.stmtId ?? "";
    if (id === stmtId) node.classList.add("selected");
    else if (direct.has(id)) node.classList.add("direct-dep");
  });
  container.querySelectorAll<SVGLineElement>(".dep-edge").forEach((edge) => {
    edge.classList.toggle("highlighted", edge.dataset.target === stmtId);
  });
}
