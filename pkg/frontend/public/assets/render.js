// DOM renderers. Rendering is a pure function of the state: containers are
// rebuilt in place, and result cards appear exactly in response order.
function el(tag, className, text) {
    const node = document.createElement(tag);
    if (className)
        node.className = className;
    if (text !== undefined)
        node.textContent = text;
    return node;
}
export function renderErrorBanner(container, error) {
    container.innerHTML = "";
    if (!error) {
        container.hidden = true;
        return;
    }
    container.hidden = false;
    container.appendChild(el("div", "error-banner", error));
}
function hitCard(hit, state) {
    const card = el("article", "hit-card");
    card.dataset.stmtId = hit.stmt_id;
    if (state.selected === hit.stmt_id)
        card.classList.add("selected");
    const head = el("header", "hit-head");
    head.appendChild(el("span", "hit-label", hit.label ?? hit.stmt_id));
    head.appendChild(el("span", `hit-kind kind-${hit.kind}`, hit.kind));
    head.appendChild(el("span", "hit-score", hit.score.toFixed(3)));
    card.appendChild(head);
    const text = state.viewMode === "unfolded" ? hit.unfolded_text : hit.snippet;
    const body = el("p", `hit-text mode-${state.viewMode}`, text);
    card.appendChild(body);
    const meta = [hit.doc_id, hit.journal, hit.year ? String(hit.year) : null]
        .filter(Boolean)
        .join(" · ");
    card.appendChild(el("footer", "hit-meta", meta));
    return card;
}
export function renderHits(container, state) {
    container.innerHTML = "";
    if (!state.hits.length) {
        container.appendChild(el("p", "empty-state", state.searching ? "searching…" : "no results"));
        return;
    }
    for (const hit of state.hits) {
        container.appendChild(hitCard(hit, state));
    }
}
export function renderDetail(container, detail) {
    container.innerHTML = "";
    if (!detail) {
        container.appendChild(el("p", "empty-state", "select a result to inspect it"));
        return;
    }
    const s = detail.statement;
    container.appendChild(el("h3", "detail-label", s.label ?? s.stmt_id));
    container.appendChild(el("p", "detail-kind", `${s.kind} · layer ${detail.layer ?? "?"}`));
    container.appendChild(el("p", "detail-content", s.content));
    if (detail.unfolded) {
        container.appendChild(el("h4", undefined, "unfolded"));
        const text = detail.unfolded.unfolded_text + (detail.unfolded.truncated ? " …[truncated]" : "");
        container.appendChild(el("p", "detail-unfolded", text));
    }
    const deps = el("p", "detail-deps", `requires: ${detail.deps.join(", ") || "nothing"}`);
    container.appendChild(deps);
    const dependents = el("p", "detail-dependents", `required by: ${detail.dependents.join(", ") || "nothing"}`);
    container.appendChild(dependents);
}
