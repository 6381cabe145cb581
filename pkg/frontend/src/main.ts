// Browser entry point: materializes virtual nodes into real DOM and wires
// events to the store. Everything interesting lives in the pure modules;
// this file is deliberately thin glue.

import { ApiClient } from "./api.js";
import { conceptSearch } from "./search.js";
import {
  ExplorerStore,
  restoreSession,
  serializeSession,
  type SessionState,
} from "./state.js";
import { renderApp, type VNode } from "./view.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const SESSION_KEY = "prereqchain-session";

export function materialize(node: VNode | string, inSvg = false): Node {
  if (typeof node === "string") {
    return document.createTextNode(node);
  }
  const svg = inSvg || node.tag === "svg";
  const el = svg
    ? document.createElementNS(SVG_NS, node.tag)
    : document.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) {
    el.setAttribute(key, value);
  }
  for (const child of node.children) {
    el.appendChild(materialize(child, svg));
  }
  return el;
}

function savedSession(): SessionState | undefined {
  try {
    const text = localStorage.getItem(SESSION_KEY);
    return text === null ? undefined : restoreSession(text);
  } catch {
    // A garbled saved session starts the explorer fresh.
    return undefined;
  }
}

export async function bootstrap(root: HTMLElement, baseUrl: string): Promise<void> {
  const api = new ApiClient(baseUrl);
  const store = new ExplorerStore(api, savedSession());
  const names = (await api.concepts()).map((c) => c.name);
  const graph = await api.graph();

  const input = document.createElement("input");
  input.type = "search";
  input.placeholder = "Search concepts";
  const suggestions = document.createElement("ul");
  suggestions.className = "suggestions";
  const view = document.createElement("div");
  view.className = "view";
  root.replaceChildren(input, suggestions, view);

  const rerender = (): void => {
    view.replaceChildren(materialize(renderApp(store.state, names, graph.edges)));
    try {
      localStorage.setItem(SESSION_KEY, serializeSession(store.state));
    } catch {
      // Storage being unavailable only loses persistence, not the session.
    }
  };

  input.addEventListener("input", () => {
    const items = conceptSearch(input.value, names).map((name) => {
      const li = document.createElement("li");
      li.textContent = name;
      li.addEventListener("click", () => {
        input.value = "";
        suggestions.replaceChildren();
        const done = store.setTarget(name);
        rerender();
        void done.then(rerender);
      });
      return li;
    });
    suggestions.replaceChildren(...items);
  });

  view.addEventListener("click", (event) => {
    const el = (event.target as Element).closest("[data-concept]");
    const name = el?.getAttribute("data-concept");
    if (name === undefined || name === null) {
      return;
    }
    const done = store.toggle(name);
    rerender();
    void done.then(rerender);
  });

  rerender();
  void store.refresh().then(rerender);
}

const root = document.getElementById("app");
if (root !== null) {
  void bootstrap(root, root.dataset.baseUrl ?? "http://127.0.0.1:8789");
}
