// Typed client for the documented /v1 endpoints. Every call goes through
// fetch with an optional AbortSignal so superseded searches can be cancelled.

export interface SearchHit {
  stmt_id: string;
  score: number;
  label: string | null;
  kind: string;
  doc_id: string;
  year: number | null;
  journal: string | null;
  snippet: string;
  unfolded_text: string;
}

export interface SearchResponse {
  hits: SearchHit[];
  took_ms: number;
  k: number;
  k_clamped?: boolean;
}

export interface SearchFilters {
  kinds?: string[];
  year_from?: number;
  year_to?: number;
}

export interface GraphNode {
  stmt_id: string;
  label: string | null;
  kind: string;
  layer: number;
}

export interface GraphEdge {
  source: string;
  target: string;
}

export interface DocGraph {
  doc_id: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface StatementDetail {
  statement: {
    stmt_id: string;
    doc_id: string;
    kind: string;
    label: string | null;
    content: string;
    local_deps: string[];
  };
  unfolded: { unfolded_text: string; layer: number; truncated: boolean } | null;
  deps: string[];
  dependents: string[];
  layer: number | null;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function requestJson<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    throw new ApiError(resp.status, `${init?.method ?? "GET"} ${url} -> ${resp.status}`);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private base: string = "") {}

  search(
    query: string,
    k: number,
    filters: SearchFilters,
    signal?: AbortSignal,
  ): Promise<SearchResponse> {
    return requestJson<SearchResponse>(`${this.base}/v1/search`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ query, k, filters }),
      signal,
    });
  }

  statement(stmtId: string, signal?: AbortSignal): Promise<StatementDetail> {
    return requestJson<StatementDetail>(
      `${this.base}/v1/statements/${encodeURIComponent(stmtId)}`,
      { signal },
    );
  }

  documentGraph(docId: string, signal?: AbortSignal): Promise<DocGraph> {
    return requestJson<DocGraph>(
      `${this.base}/v1/documents/${encodeURIComponent(docId)}/graph`,
      { signal },
    );
  }

  health(): Promise<{ status: string; index_size: number; docs: number; statements: number }> {
    return requestJson(`${this.base}/healthz`);
  }
}
