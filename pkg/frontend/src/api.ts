/**
 * Typed client for the /api artifact server.
 *
 * Every response type mirrors the server's schema document field for field;
 * the UI renders these values untouched. Concurrent requests for the same
 * (endpoint, params) share one in-flight promise.
 */

export interface NeighborEntry {
  subreddit: string;
  similarity: number;
}

export interface ClustersDoc {
  month: string;
  algorithm: string;
  k: number;
  seed: number | null;
  assignment: Record<string, number>;
  sizes: number[];
  top_members: Record<string, string[]>;
}

export interface LayoutDoc {
  month: string;
  coordinates: Record<string, [number, number]>;
}

export interface NeighborsDoc {
  month: string;
  subreddit: string;
  n: number;
  neighbors: NeighborEntry[];
}

export interface TimelineDoc {
  subreddit: string;
  n: number;
  months: string[];
  neighbors: Record<string, NeighborEntry[] | null>;
  adjacent_jaccard: { months: [string, string]; jaccard: number | null }[];
}

export interface StabilitySummary {
  mean: number;
  stddev: number;
  subreddits: number;
  histogram: { bin_edges: number[]; counts: number[] };
}

export interface StabilityDoc {
  months: string[];
  n_neighbors: number;
  scores: Record<string, number[]>;
  per_subreddit_mean: Record<string, number>;
  summary: StabilitySummary | null;
  pearson_r_popularity: number | null;
}

export interface ViDoc {
  algorithm: string;
  k: number;
  labels: string[];
  matrix: number[][];
  comparisons: number[][];
  units: string;
}

export interface MetricsDoc {
  algorithm: string;
  k: number;
  months: Record<
    string,
    {
      month: string;
      algorithm: string;
      k: number;
      silhouette: number;
      davies_bouldin: number | null;
    }
  >;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export type FetchJson = (url: string) => Promise<unknown>;

type Params = Record<string, string | number | undefined>;

/** Stable query string: sorted keys, undefined entries dropped. */
export function canonicalQuery(params: Params): string {
  const search = new URLSearchParams();
  for (const key of Object.keys(params).sort()) {
    const value = params[key];
    if (value !== undefined) search.set(key, String(value));
  }
  return search.toString();
}

async function defaultFetchJson(url: string): Promise<unknown> {
  const response = await fetch(url);
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const detail = (body as { detail?: { code?: string; message?: string } } | null)
      ?.detail;
    throw new ApiError(
      response.status,
      detail?.code ?? 'http_error',
      detail?.message ?? `request failed with ${response.status}`,
    );
  }
  return body;
}

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    private base = '',
    private fetchJson: FetchJson = defaultFetchJson,
  ) {}

  /** How many requests are currently in flight (for tests/diagnostics). */
  get pending(): number {
    return this.inflight.size;
  }

  private request(endpoint: string, params: Params = {}): Promise<unknown> {
    const query = canonicalQuery(params);
    const key = query ? `${endpoint}?${query}` : endpoint;
    const existing = this.inflight.get(key);
    if (existing) return existing;
    const started = this.fetchJson(this.base + key).finally(() => {
      this.inflight.delete(key);
    });
    this.inflight.set(key, started);
    return started;
  }

  months(): Promise<string[]> {
    return this.request('/api/months') as Promise<string[]>;
  }

  clusters(month: string, algo: string, k: number): Promise<ClustersDoc> {
    return this.request(`/api/months/${encodeURIComponent(month)}/clusters`, {
      algo,
      k,
    }) as Promise<ClustersDoc>;
  }

  layout(month: string): Promise<LayoutDoc> {
    return this.request(
      `/api/months/${encodeURIComponent(month)}/layout`,
    ) as Promise<LayoutDoc>;
  }

  neighbors(month: string, name: string, n?: number): Promise<NeighborsDoc> {
    return this.request(
      `/api/months/${encodeURIComponent(month)}/subreddits/${encodeURIComponent(name)}/neighbors`,
      { n },
    ) as Promise<NeighborsDoc>;
  }

  timeline(name: string, n?: number): Promise<TimelineDoc> {
    return this.request(
      `/api/subreddits/${encodeURIComponent(name)}/timeline`,
      { n },
    ) as Promise<TimelineDoc>;
  }

  stability(): Promise<StabilityDoc> {
    return this.request('/api/stability/summary') as Promise<StabilityDoc>;
  }

  vi(algo: string, k: number): Promise<ViDoc> {
    return this.request('/api/vi', { algo, k }) as Promise<ViDoc>;
  }

  metrics(algo: string, k: number): Promise<MetricsDoc> {
    return this.request('/api/metrics', { algo, k }) as Promise<MetricsDoc>;
  }
}
