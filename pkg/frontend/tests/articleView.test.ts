import { describe, expect, it, vi } from "vitest";

import { highlightText, isConsistent, renderArticle, suggestedLabel } from "../src/articleView.js";
import { articleDetail } from "./helpers.js";

function container(): HTMLElement {
  const el = document.createElement("div");
  document.body.appendChild(el);
  return el;
}

const noHandlers = { onToggle: () => {}, onArticleLabel: () => {}, onSubmit: () => {} };

describe("highlightText", () => {
  it("marks exactly the API-provided spans, no client-side matching", () => {
    // the span does not correspond to any keyword in the text on purpose
    const fragment = highlightText("abcdef", [[1, 3, "whatever"]]);
    const host = document.createElement("div");
    host.appendChild(fragment);
    expect(host.innerHTML).toBe("a<mark>bc</mark>def");
  });

  it("drops overlapping and out-of-range spans", () => {
    const fragment = highlightText("abcdef", [
      [0, 2, "k"],
      [1, 3, "k"],
      [4, 99, "k"],
    ]);
    const host = document.createElement("div");
    host.appendChild(fragment);
    expect(host.innerHTML).toBe("<mark>ab</mark>cdef");
  });
});

describe("verdict consistency", () => {
  it("suggests suspicious as soon as one post is marked SCP", () => {
    expect(suggestedLabel(new Map())).toBeNull();
    expect(suggestedLabel(new Map([["p1", -1 as const]]))).toBe(-1);
    expect(suggestedLabel(new Map([["p1", -1 as const], ["p2", 1 as const]]))).toBe(1);
  });

  it("blocks submission until the choice matches the toggles", () => {
    expect(isConsistent({ articleLabel: null, toggles: new Map() })).toBe(false);
    expect(isConsistent({ articleLabel: 1, toggles: new Map() })).toBe(true);
    expect(isConsistent({ articleLabel: 1, toggles: new Map([["p1", -1 as const]]) })).toBe(false);
    expect(isConsistent({ articleLabel: 1, toggles: new Map([["p1", 1 as const]]) })).toBe(true);
    expect(isConsistent({ articleLabel: -1, toggles: new Map([["p1", 1 as const]]) })).toBe(false);
  });
});

describe("renderArticle", () => {
  it("renders probability badges and API highlights", () => {
    const el = container();
    renderArticle(el, articleDetail(), { articleLabel: null, toggles: new Map() }, noHandlers);
    const badges = [...el.querySelectorAll(".prob-badge")].map((b) => b.textContent);
    expect(badges).toEqual(["0.88", "0.12"]);
    expect(el.querySelectorAll("mark")).toHaveLength(1);
    expect(el.querySelector("mark")!.textContent).toBe("誤報");
  });

  it("disables submit until a consistent verdict is chosen", () => {
    const el = container();
    renderArticle(el, articleDetail(), { articleLabel: null, toggles: new Map() }, noHandlers);
    expect((el.querySelector(".submit-verdict") as HTMLButtonElement).disabled).toBe(true);

    renderArticle(el, articleDetail(), { articleLabel: 1, toggles: new Map([["p1", 1]]) }, noHandlers);
    expect((el.querySelector(".submit-verdict") as HTMLButtonElement).disabled).toBe(false);

    renderArticle(el, articleDetail(), { articleLabel: 1, toggles: new Map([["p1", -1]]) }, noHandlers);
    expect((el.querySelector(".submit-verdict") as HTMLButtonElement).disabled).toBe(true);
  });

  it("disables submit on already-reviewed articles", () => {
    const el = container();
    renderArticle(el, articleDetail({ status: "reviewed" }), { articleLabel: 1, toggles: new Map() }, noHandlers);
    expect((el.querySelector(".submit-verdict") as HTMLButtonElement).disabled).toBe(true);
  });

  it("reports toggle clicks, clearing on the second click", () => {
    const onToggle = vi.fn();
    const el = container();
    renderArticle(el, articleDetail(), { articleLabel: null, toggles: new Map([["p1", 1]]) }, { ...noHandlers, onToggle });
    const firstPostButtons = [...el.querySelectorAll(".post")[0].querySelectorAll("button")] as HTMLButtonElement[];
    firstPostButtons[0].click(); // SCP already toggled -> clears
    expect(onToggle).toHaveBeenCalledWith("p1", null);
    firstPostButtons[1].click();
    expect(onToggle).toHaveBeenCalledWith("p1", -1);
  });
});
