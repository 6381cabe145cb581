// Pure view layer: state in, virtual nodes out. Nothing here touches the
// DOM or the network, and step order is taken from the server's reply
// verbatim.

import type { LearningPath } from "./api.js";
import type { SessionState } from "./state.js";

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  children: (VNode | string)[];
}

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  children: (VNode | string)[] = [],
): VNode {
  return { tag, attrs, children };
}

export function renderBanner(banner: string | null): VNode {
  if (banner === null) {
    return h("div", { class: "banner", hidden: "" });
  }
  return h("div", { class: "banner", role: "alert" }, [banner]);
}

export function renderSteps(path: LearningPath): VNode {
  const items = path.steps.map((step) => {
    const children: (VNode | string)[] = [
      h("span", { class: "concept", "data-concept": step.concept }, [step.concept]),
    ];
    for (const resource of step.resources) {
      children.push(" ");
      children.push(h("a", { class: "resource", href: resource.path }, [resource.id]));
    }
    if (step.unmapped) {
      children.push(" ");
      children.push(h("em", { class: "unmapped" }, ["no mapped resources"]));
    }
    return h("li", {}, children);
  });
  return h("ol", { class: "steps" }, items);
}

export function renderExcluded(excluded: string[]): VNode {
  const items = excluded.map((name) =>
    h("li", { class: "struck", "data-concept": name }, [name]),
  );
  return h("ul", { class: "excluded" }, items);
}

// Longest-path layering. The sweep count is capped at the vertex count so
// mutual edges and other cycles terminate instead of hanging.
export function layerAssignment(n: number, edges: [number, number][]): number[] {
  const layer: number[] = new Array(n).fill(0);
  for (let sweep = 0; sweep < n; sweep++) {
    let changed = false;
    for (const [src, tgt] of edges) {
      const lifted = (layer[src] ?? 0) + 1;
      if (lifted > (layer[tgt] ?? 0)) {
        layer[tgt] = lifted;
        changed = true;
      }
    }
    if (!changed) {
      break;
    }
  }
  return layer;
}

const COL_GAP = 150;
const ROW_GAP = 56;
const MARGIN = 60;

function positions(names: string[], edges: [number, number][]): [number, number][] {
  const layer = layerAssignment(names.length, edges);
  const slot: number[] = new Array(names.length).fill(0);
  const used = new Map<number, number>();
  for (let i = 0; i < names.length; i++) {
    const depth = layer[i] ?? 0;
    const row = used.get(depth) ?? 0;
    slot[i] = row;
    used.set(depth, row + 1);
  }
  return names.map((_, i) => [
    MARGIN + (layer[i] ?? 0) * COL_GAP,
    MARGIN + (slot[i] ?? 0) * ROW_GAP,
  ]);
}

export function renderGraph(
  names: string[],
  edges: [number, number][],
  state: SessionState,
): VNode {
  const pos = positions(names, edges);
  const lines = edges.map(([src, tgt]) => {
    const [x1, y1] = pos[src] ?? [0, 0];
    const [x2, y2] = pos[tgt] ?? [0, 0];
    return h("line", {
      class: "edge",
      x1: String(x1),
      y1: String(y1),
      x2: String(x2),
      y2: String(y2),
    });
  });
  const nodes = names.map((name, i) => {
    const [x, y] = pos[i] ?? [0, 0];
    let cls = "node";
    if (state.known.includes(name)) {
      cls += " known";
    }
    if (state.target === name) {
      cls += " target";
    }
    return h("g", { class: cls, "data-concept": name }, [
      h("circle", { cx: String(x), cy: String(y), r: "14" }),
      h("text", { x: String(x), y: String(y - 20), "text-anchor": "middle" }, [name]),
    ]);
  });
  const width = Math.max(...pos.map(([x]) => x), MARGIN) + MARGIN;
  const height = Math.max(...pos.map(([, y]) => y), MARGIN) + MARGIN;
  return h(
    "svg",
    { class: "graph", viewBox: `0 0 ${width} ${height}`, width: String(width) },
    [...lines, ...nodes],
  );
}

export function renderApp(
  state: SessionState,
  names: string[],
  edges: [number, number][],
): VNode {
  const children: (VNode | string)[] = [renderBanner(state.banner)];
  if (state.target === null) {
    children.push(h("p", { class: "hint" }, ["Pick a target concept to build a path."]));
  } else {
    children.push(h("h2", { class: "target" }, [state.target]));
  }
  if (state.path !== null) {
    children.push(renderSteps(state.path));
    if (state.path.excluded_known.length > 0) {
      children.push(renderExcluded(state.path.excluded_known));
    }
    if (state.path.note !== undefined) {
      children.push(h("p", { class: "note" }, [state.path.note]));
    }
  }
  children.push(renderGraph(names, edges, state));
  return h("div", { class: "app" }, children);
}
