// Bootstrap: wire the search box, result list, detail panel, and graph view
// to the /v1 API, keeping the query state in the URL.
import { ApiClient, ApiError } from "./api.js";
import { highlightNode, renderGraph } from "./graph.js";
import { renderDetail, renderErrorBanner, renderHits } from "./render.js";
import { SearchController, canSearch, decodeStateFromQuery, encodeStateToQuery, selectHit, toggleViewMode, } from "./state.js";
const api = new ApiClient("");
const controller = new SearchController(api);
let state = decodeStateFromQuery(window.location.search);
let currentGraph = null;
let currentGraphDoc = null;
const $ = (id) => {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing #${id}`);
    return node;
};
const queryInput = $("query");
const kInput = $("k");
const kindSelect = $("kind");
const searchButton = $("search-button");
const viewToggle = $("view-toggle");
const banner = $("banner");
const results = $("results");
const detailPanel = $("detail");
const graphPanel = $("graph");
const statusLine = $("status");
function syncUrl() {
    history.replaceState(null, "", window.location.pathname + encodeStateToQuery(state));
}
function redraw() {
    searchButton.disabled = !canSearch(state);
    viewToggle.textContent = state.viewMode === "folded" ? "show unfolded" : "show folded";
    renderErrorBanner(banner, state.error);
    renderHits(results, state);
    results.querySelectorAll(".hit-card").forEach((card) => {
        card.addEventListener("click", () => onSelect(card.dataset.stmtId ?? null));
    });
    syncUrl();
}
async function onSearch() {
    if (!canSearch(state))
        return;
    state = { ...state, searching: true };
    redraw();
    state = await controller.run(state);
    redraw();
}
async function onSelect(stmtId) {
    state = selectHit(state, stmtId);
    redraw();
    if (!state.selected) {
        renderDetail(detailPanel, null);
        return;
    }
    try {
        const detail = await api.statement(state.selected);
        renderDetail(detailPanel, detail);
        await showGraph(detail.statement.doc_id, state.selected);
    }
    catch (err) {
        renderDetail(detailPanel, null);
    }
}
async function showGraph(docId, focus) {
    try {
        if (currentGraphDoc !== docId) {
            currentGraph = await api.documentGraph(docId);
            currentGraphDoc = docId;
            renderGraph(graphPanel, currentGraph);
        }
        if (currentGraph)
            highlightNode(graphPanel, currentGraph, focus);
    }
    catch (err) {
        if (err instanceof ApiError && err.status === 404) {
            renderGraph(graphPanel, null);
            currentGraph = null;
            currentGraphDoc = null;
        }
    }
}
queryInput.value = state.query;
kInput.value = String(state.k);
queryInput.addEventListener("input", () => {
    state = { ...state, query: queryInput.value };
    searchButton.disabled = !canSearch(state);
    syncUrl();
});
queryInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter")
        void onSearch();
});
kInput.addEventListener("change", () => {
    const k = Number(kInput.value);
    state = { ...state, k: Number.isFinite(k) && k > 0 ? Math.min(k, 100) : 10 };
    syncUrl();
});
kindSelect.addEventListener("change", () => {
    state = { ...state, kinds: kindSelect.value ? [kindSelect.value] : [] };
    syncUrl();
});
searchButton.addEventListener("click", () => void onSearch());
viewToggle.addEventListener("click", () => {
    state = toggleViewMode(state);
    redraw();
});
api
    .health()
    .then((h) => {
    statusLine.textContent = `${h.statements} statements from ${h.docs} documents, ${h.index_size} indexed`;
})
    .catch(() => {
    statusLine.textContent = "service unreachable";
});
redraw();
if (canSearch(state))
    void onSearch();
