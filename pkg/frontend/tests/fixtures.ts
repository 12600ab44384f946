import { DocGraph, SearchHit } from "../src/api.js";

export function hit(id: string, score: number, extra: Partial<SearchHit> = {}): SearchHit {
  return {
    stmt_id: id,
    score,
    label: `Theorem ${id}`,
    kind: "theorem",
    doc_id: "doc-1",
    year: 2001,
    journal: "jrnl-0",
    snippet: `snippet of ${id}`,
    unfolded_text: `unfolded text of ${id}`,
    ...extra,
  };
}

export const chainGraph: DocGraph = {
  doc_id: "doc-1",
  nodes: [
    { stmt_id: "doc-1:00000000", label: "Definition 1", kind: "definition", layer: 0 },
    { stmt_id: "doc-1:00000100", label: "Lemma 2", kind: "lemma", layer: 1 },
    { stmt_id: "doc-1:00000200", label: "Theorem 3", kind: "theorem", layer: 2 },
  ],
  edges: [
    { source: "doc-1:00000000", target: "doc-1:00000100" },
    { source: "doc-1:00000100", target: "doc-1:00000200" },
  ],
};

export const edgelessGraph: DocGraph = {
  doc_id: "doc-2",
  nodes: [
    { stmt_id: "doc-2:00000000", label: "Remark 1", kind: "remark", layer: 0 },
    { stmt_id: "doc-2:00000100", label: "Remark 2", kind: "remark", layer: 0 },
  ],
  edges: [],
};

type FetchCall = { url: string; body: unknown };

/** Installs a scripted fetch; each enqueued responder resolves one call. */
export class FetchMock {
  calls: FetchCall[] = [];
  private queue: Array<(url: string, init?: RequestInit) => Promise<Response>> = [];

  install(): void {
    globalThis.fetch = ((url: string, init?: RequestInit) => {
      this.calls.push({ url: String(url), body: init?.body ? JSON.parse(String(init.body)) : null });
      const next = this.queue.shift();
      if (!next) throw new Error(`unexpected fetch: ${url}`);
      return next(String(url), init);
    }) as typeof fetch;
  }

  enqueueJson(payload: unknown, status = 200): void {
    this.queue.push(async () =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { "content-type": "application/json" },
      }),
    );
  }

  enqueueError(status: number): void {
    this.queue.push(async () => new Response("boom", { status }));
  }

  /** Response that waits until `release` is called, honoring abort signals. */
  enqueueDeferred(payload: unknown): () => void {
    let release!: () => void;
    const gate = new Promise<void>((resolve) => (release = resolve));
    this.queue.push((_url, init) => {
      return new Promise<Response>((resolve, reject) => {
        init?.signal?.addEventListener("abort", () =>
          reject(new DOMException("aborted", "AbortError")),
        );
        void gate.then(() =>
          resolve(
            new Response(JSON.stringify(payload), {
              status: 200,
              headers: { "content-type": "application/json" },
            }),
          ),
        );
      });
    });
    return release;
  }
}
