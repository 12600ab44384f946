// Typed client for the documented /v1 endpoints. Every call goes through
// fetch with an optional AbortSignal so superseded searches can be cancelled.
export class ApiError extends Error {
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
async function requestJson(url, init) {
    const resp = await fetch(url, init);
    if (!resp.ok) {
        throw new ApiError(resp.status, `${init?.method ?? "GET"} ${url} -> ${resp.status}`);
    }
    return (await resp.json());
}
export class ApiClient {
    constructor(base = "") {
        this.base = base;
    }
    search(query, k, filters, signal) {
        return requestJson(`${this.base}/v1/search`, {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify({ query, k, filters }),
            signal,
        });
    }
    statement(stmtId, signal) {
        return requestJson(`${this.base}/v1/statements/${encodeURIComponent(stmtId)}`, { signal });
    }
    documentGraph(docId, signal) {
        return requestJson(`${this.base}/v1/documents/${encodeURIComponent(docId)}/graph`, { signal });
    }
    health() {
        return requestJson(`${this.base}/healthz`);
    }
}
