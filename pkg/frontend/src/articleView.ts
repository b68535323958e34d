import type { ArticleDetail, HighlightSpan } from "./types.js";

/** Per-post SCP toggles chosen by the reviewer, keyed by post id. */
export type ToggleState = Map<string, 1 | -1>;

export interface VerdictChoice {
  articleLabel: 1 | -1 | null;
  toggles: ToggleState;
}

export interface ArticleHandlers {
  onToggle(postId: string, value: 1 | -1 | null): void;
  onArticleLabel(value: 1 | -1): void;
  onSubmit(): void;
}

/**
 * The verdict an SCP-toggle pattern implies: suspicious iff at least one
 * post is marked SCP. Used both to auto-suggest and to gate submission.
 */
export function suggestedLabel(toggles: ToggleState): 1 | -1 | null {
  if (toggles.size === 0) return null;
  for (const value of toggles.values()) {
    if (value === 1) return 1;
  }
  return -1;
}

/** Submission is allowed only for label choices consistent with the
 * toggles (suspicious iff >= 1 post marked SCP, when toggles are used). */
export function isConsistent(choice: VerdictChoice): boolean {
  if (choice.articleLabel === null) return false;
  const implied = suggestedLabel(choice.toggles);
  return implied === null || implied === choice.articleLabel;
}

/** Wrap API-provided [start, end, keyword] spans in <mark>. Spans are
 * trusted verbatim; overlapping spans keep the earliest one. */
export function highlightText(text: string, spans: HighlightSpan[]): DocumentFragment {
  const fragment = document.createDocumentFragment();
  const ordered = [...spans].sort((a, b) => a[0] - b[0]);
  let cursor = 0;
  for (const [start, end] of ordered) {
    if (start < cursor || start >= end || end > text.length) continue;
    if (start > cursor) fragment.appendChild(document.createTextNode(text.slice(cursor, start)));
    const mark = document.createElement("mark");
    mark.textContent = text.slice(start, end);
    fragment.appendChild(mark);
    cursor = end;
  }
  if (cursor < text.length) fragment.appendChild(document.createTextNode(text.slice(cursor)));
  return fragment;
}

export function renderArticle(
  container: HTMLElement,
  detail: ArticleDetail,
  choice: VerdictChoice,
  handlers: ArticleHandlers,
): void {
  container.replaceChildren();

  const heading = document.createElement("h2");
  heading.textContent = detail.title ?? detail.url;
  const sub = document.createElement("p");
  sub.className = "article-meta";
  sub.textContent = `${detail.url} — score ${detail.score.toFixed(2)} — ${detail.status}`;
  container.append(heading, sub);

  const list = document.createElement("ul");
  list.className = "post-list";
  for (const post of detail.posts) {
    const item = document.createElement("li");
    item.className = "post";
    item.dataset.postId = post.id;

    const badge = document.createElement("span");
    badge.className = "prob-badge";
    badge.textContent = post.probability.toFixed(2);
    const body = document.createElement("span");
    body.className = "post-text";
    body.appendChild(highlightText(post.text, post.spans));
    item.append(badge, body);

    const toggles = document.createElement("span");
    toggles.className = "post-toggle";
    for (const [value, caption] of [[1, "SCP"], [-1, "not SCP"]] as const) {
      const button = document.createElement("button");
      button.textContent = caption;
      button.className = choice.toggles.get(post.id) === value ? "toggled" : "";
      button.addEventListener("click", () => {
        const already = choice.toggles.get(post.id) === value;
        handlers.onToggle(post.id, already ? null : value);
      });
      toggles.appendChild(button);
    }
    item.appendChild(toggles);
    list.appendChild(item);
  }
  container.appendChild(list);

  const controls = document.createElement("div");
  controls.className = "verdict-controls";
  for (const [value, caption] of [[1, "Suspicious"], [-1, "Not suspicious"]] as const) {
    const label = document.createElement("label");
    const radio = document.createElement("input");
    radio.type = "radio";
    radio.name = "article-label";
    radio.setAttribute("value", String(value));
    radio.checked = choice.articleLabel === value;
    radio.addEventListener("change", () => handlers.onArticleLabel(value));
    label.append(radio, document.createTextNode(caption));
    controls.appendChild(label);
  }
  const submit = document.createElement("button");
  submit.className = "submit-verdict";
  submit.textContent = "Submit verdict";
  submit.disabled = detail.status !== "pending" || !isConsistent(choice);
  submit.addEventListener("click", () => handlers.onSubmit());
  controls.appendChild(submit);
  container.appendChild(controls);
}
