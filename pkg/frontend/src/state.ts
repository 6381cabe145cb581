// Session state and the store that keeps it in sync with the service.
// Every displayed ordering comes from POST /path; the store never
// computes or reorders steps locally.

import type { ApiClient, LearningPath } from "./api.js";

export interface SessionState {
  target: string | null;
  known: string[];
  path: LearningPath | null;
  banner: string | null;
}

export function createSession(): SessionState {
  return { target: null, known: [], path: null, banner: null };
}

export function toggleKnown(state: SessionState, name: string): SessionState {
  const known = state.known.includes(name)
    ? state.known.filter((k) => k !== name)
    : [...state.known, name];
  return { ...state, known };
}

// Picking a target drops it from the known set; it only returns there if
// the user marks it known again afterwards.
export function setTarget(state: SessionState, name: string): SessionState {
  return { ...state, target: name, known: state.known.filter((k) => k !== name) };
}

// The banner is transient feedback, not session data.
export function serializeSession(state: SessionState): string {
  return JSON.stringify({ target: state.target, known: state.known, path: state.path });
}

function isStringArray(value: unknown): value is string[] {
  return Array.isArray(value) && value.every((v) => typeof v === "string");
}

function isPath(value: unknown): value is LearningPath {
  if (typeof value !== "object" || value === null) {
    return false;
  }
  const path = value as Record<string, unknown>;
  return (
    typeof path.target === "string" &&
    Array.isArray(path.steps) &&
    isStringArray(path.excluded_known)
  );
}

export function restoreSession(text: string): SessionState {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch {
    throw new Error("session data is not valid JSON");
  }
  if (typeof parsed !== "object" || parsed === null || Array.isArray(parsed)) {
    throw new Error("session data must be an object");
  }
  const raw = parsed as Record<string, unknown>;
  const target = raw.target ?? null;
  if (target !== null && typeof target !== "string") {
    throw new Error("session target must be a string or null");
  }
  if (!isStringArray(raw.known ?? [])) {
    throw new Error("session known must be a list of names");
  }
  const path = raw.path ?? null;
  if (path !== null && !isPath(path)) {
    throw new Error("session path does not look like a learning path");
  }
  return {
    target: target as string | null,
    known: (raw.known as string[] | undefined) ?? [],
    path: path as LearningPath | null,
    banner: null,
  };
}

type PathApi = Pick<ApiClient, "path">;

// Wraps the session with fetch plumbing: newer toggles abort in-flight
// path requests, and a stale response can never overwrite a newer one.
export class ExplorerStore {
  state: SessionState;
  private controller: AbortController | null = null;
  private seq = 0;

  constructor(private readonly api: PathApi, state?: SessionState) {
    this.state = state ?? createSession();
  }

  toggle(name: string): Promise<void> {
    this.state = toggleKnown(this.state, name);
    return this.refresh();
  }

  setTarget(name: string): Promise<void> {
    this.state = setTarget(this.state, name);
    return this.refresh();
  }

  async refresh(): Promise<void> {
    this.controller?.abort();
    if (this.state.target === null) {
      this.controller = null;
      this.state = { ...this.state, path: null, banner: null };
      return;
    }
    const controller = new AbortController();
    this.controller = controller;
    const ticket = ++this.seq;
    let path: LearningPath;
    try {
      path = await this.api.path(this.state.target, this.state.known, controller.signal);
    } catch (error) {
      if (ticket !== this.seq || controller.signal.aborted) {
        return;
      }
      // Keep the stale path on screen; the banner is the only change.
      const message = error instanceof Error ? error.message : String(error);
      this.state = { ...this.state, banner: message };
      return;
    }
    if (ticket !== this.seq) {
      return;
    }
    this.state = { ...this.state, path, banner: null };
  }
}
