// Typed client for the prerequisite-chain service. Path ordering is the
// server's business; this module only moves JSON and maps HTTP failures
// to ApiError.

export interface Concept {
  index: number;
  name: string;
}

export interface Resource {
  id: string;
  path: string;
}

export interface PathStep {
  concept: string;
  resources: Resource[];
  unmapped: boolean;
}

export interface LearningPath {
  target: string;
  steps: PathStep[];
  excluded_known: string[];
  note?: string;
}

export interface GraphStats {
  vertices: number;
  edges: number;
  mutual_pairs: string[][];
  isolated: string[];
  longest_path_len: number;
  longest_path: string[];
  top_in: [string, number][];
  top_out: [string, number][];
}

export interface GraphData {
  edges: [number, number][];
  stats: GraphStats;
}

export interface Prediction {
  source: string;
  target: string;
  score: number;
  label: boolean;
  method: string;
}

export interface ResourceDoc {
  id: string;
  path: string;
  domain: string;
  label: string;
  course?: string | null;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function parse<T>(response: Response): Promise<T> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const message = (body as { error?: string }).error ?? response.statusText;
    throw new ApiError(response.status, message);
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private get<T>(path: string, signal?: AbortSignal): Promise<T> {
    return fetch(this.baseUrl + path, { signal }).then((r) => parse<T>(r));
  }

  health(): Promise<{ status: string }> {
    return this.get("/health");
  }

  async concepts(): Promise<Concept[]> {
    const body = await this.get<{ concepts: Concept[] }>("/concepts");
    return body.concepts;
  }

  graph(): Promise<GraphData> {
    return this.get("/graph");
  }

  predict(src: string, tgt: string): Promise<Prediction> {
    const query = `src=${encodeURIComponent(src)}&tgt=${encodeURIComponent(tgt)}`;
    return this.get(`/predict?${query}`);
  }

  resources(concept: string): Promise<ResourceDoc[]> {
    return this.get<{ concept: string; documents: ResourceDoc[] }>(
      `/resources?concept=${encodeURIComponent(concept)}`,
    ).then((body) => body.documents);
  }

  async path(target: string, known: string[], signal?: AbortSignal): Promise<LearningPath> {
    const response = await fetch(`${this.baseUrl}/path`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ target, known }),
      signal,
    });
    return parse<LearningPath>(response);
  }
}
