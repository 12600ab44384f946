import { beforeEach, describe, expect, it } from "vitest";

import { renderErrorBanner, renderHits } from "../src/render.js";
import { applyHits, initialState, toggleViewMode } from "../src/state.js";
import { hit } from "./fixtures.js";

describe("result rendering", () => {
  let container: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = '<div id="results"></div><div id="banner"></div>';
    container = document.getElementById("results")!;
  });

  it("renders one card per hit, in response order", () => {
    const state = applyHits(initialState(), [hit("x", 0.9), hit("y", 0.8), hit("z", 0.7)]);
    renderHits(container, state);
    const cards = [...container.querySelectorAll(".hit-card")];
    expect(cards).toHaveLength(3);
    expect(cards.map((c) => (c as HTMLElement).dataset.stmtId)).toEqual(["x", "y", "z"]);
  });

  it("shows snippets when folded and unfolded text when toggled, same order", () => {
    let state = applyHits(initialState(), [hit("x", 0.9), hit("y", 0.8)]);
    renderHits(container, state);
    let texts = [...container.querySelectorAll(".hit-text")].map((n) => n.textContent);
    expect(texts).toEqual(["snippet of x", "snippet of y"]);

    state = toggleViewMode(state);
    renderHits(container, state);
    texts = [...container.querySelectorAll(".hit-text")].map((n) => n.textContent);
    expect(texts).toEqual(["unfolded text of x", "unfolded text of y"]);

    const order = [...container.querySelectorAll(".hit-card")].map(
      (c) => (c as HTMLElement).dataset.stmtId,
    );
    expect(order).toEqual(["x", "y"]);
  });

  it("marks the selected card without reordering", () => {
    const state = { ...applyHits(initialState(), [hit("x", 0.9), hit("y", 0.8)]), selected: "y" };
    renderHits(container, state);
    const cards = [...container.querySelectorAll(".hit-card")];
    expect(cards.map((c) => (c as HTMLElement).dataset.stmtId)).toEqual(["x", "y"]);
    expect(cards[1].classList.contains("selected")).toBe(true);
    expect(cards[0].classList.contains("selected")).toBe(false);
  });

  it("shows an empty state when there are no hits", () => {
    renderHits(container, initialState());
    expect(container.querySelector(".empty-state")).not.toBeNull();
  });

  it("error banner toggles visibility and keeps results untouched", () => {
    const banner = document.getElementById("banner")!;
    const state = applyHits(initialState(), [hit("x", 0.9)]);
    renderHits(container, state);

    renderErrorBanner(banner, "search failed (503)");
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("503");
    expect(container.querySelectorAll(".hit-card")).toHaveLength(1);

    renderErrorBanner(banner, null);
    expect(banner.hidden).toBe(true);
  });
});
