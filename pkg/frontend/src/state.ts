// Search state and its pure transitions. The UI never reorders or re-scores
// hits: the hit array is stored exactly as the service returned it, and the
// fold/unfold mode only decides which text field gets rendered.

import { ApiClient, ApiError, SearchFilters, SearchHit } from "./api.js";

export type ViewMode = "folded" | "unfolded";

export interface UiSearchState {
  query: string;
  k: number;
  kinds: string[];
  yearFrom: number | null;
  yearTo: number | null;
  hits: SearchHit[];
  selected: string | null;
  viewMode: ViewMode;
  error: string | null;
  searching: boolean;
}

export function initialState(): UiSearchState {
  return {
    query: "",
    k: 10,
    kinds: [],
    yearFrom: null,
    yearTo: null,
    hits: [],
    selected: null,
    viewMode: "folded",
    error: null,
    searching: false,
  };
}

export function canSearch(state: UiSearchState): boolean {
  return state.query.trim().length > 0;
}

export function applyHits(state: UiSearchState, hits: SearchHit[]): UiSearchState {
  // hits replace the previous set atomically; a selection that no longer
  // appears among them is cleared
  const selected =
    state.selected && hits.some((h) => h.stmt_id === state.selected) ? state.selected : null;
  return { ...state, hits, selected, error: null, searching: false };
}

export function applyError(state: UiSearchState, message: string): UiSearchState {
  // previous hits stay visible behind the error banner
  return { ...state, error: message, searching: false };
}

export function selectHit(state: UiSearchState, stmtId: string | null): UiSearchState {
  if (stmtId !== null && !state.hits.some((h) => h.stmt_id === stmtId)) {
    return { ...state, selected: null };
  }
  return { ...state, selected: stmtId };
}

export function toggleViewMode(state: UiSearchState): UiSearchState {
  return { ...state, viewMode: state.viewMode === "folded" ? "unfolded" : "folded" };
}

function filtersOf(state: UiSearchState): SearchFilters {
  const filters: SearchFilters = {};
  if (state.kinds.length) filters.kinds = state.kinds;
  if (state.yearFrom !== null) filters.year_from = state.yearFrom;
  if (state.yearTo !== null) filters.year_to = state.yearTo;
  return filters;
}

// Query state lives in the URL so searches are shareable.

export function encodeStateToQuery(state: UiSearchState): string {
  const params = new URLSearchParams();
  if (state.query) params.set("q", state.query);
  if (state.k !== 10) params.set("k", String(state.k));
  if (state.kinds.length) params.set("kinds", state.kinds.join(","));
  if (state.yearFrom !== null) params.set("from", String(state.yearFrom));
  if (state.yearTo !== null) params.set("to", String(state.yearTo));
  if (state.viewMode !== "folded") params.set("view", state.viewMode);
  if (state.selected) params.set("sel", state.selected);
  const encoded = params.toString();
  return encoded ? `?${encoded}` : "";
}

export function decodeStateFromQuery(search: string): UiSearchState {
  const params = new URLSearchParams(search);
  const state = initialState();
  state.query = params.get("q") ?? "";
  const k = Number(params.get("k"));
  if (Number.isFinite(k) && k > 0) state.k = k;
  const kinds = params.get("kinds");
  if (kinds) state.kinds = kinds.split(",").filter(Boolean);
  const from = Number(params.get("from"));
  if (params.get("from") && Number.isFinite(from)) state.yearFrom = from;
  const to = Number(params.get("to"));
  if (params.get("to") && Number.isFinite(to)) state.yearTo = to;
  if (params.get("view") === "unfolded") state.viewMode = "unfolded";
  state.selected = params.get("sel");
  return state;
}

// Runs searches with request-cancellation semantics: firing a new search
// aborts the in-flight one, and a stale response (superseded by a newer
// query) is discarded even if its request was not abortable in time.

export class SearchController {
  private seq = 0;
  private inflight: AbortController | null = null;

  constructor(private api: ApiClient) {}

  async run(state: UiSearchState): Promise<UiSearchState> {
    if (!canSearch(state)) {
      return state;
    }
    const ticket = ++this.seq;
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const response = await this.api.search(
        state.query,
        state.k,
        filtersOf(state),
        controller.signal,
      );
      if (ticket !== this.seq) {
        return state; // superseded while awaiting: discard silently
      }
      return applyHits(state, response.hits);
    } catch (err) {
      if (ticket !== this.seq || (err instanceof DOMException && err.name === "AbortError")) {
        return state;
      }
      const message =
        err instanceof ApiError ? `search failed (${err.status})` : "search failed (network)";
      return applyError(state, message);
    }
  }
}
