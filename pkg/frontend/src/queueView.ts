import type { QueuePage } from "./types.js";

export interface QueueHandlers {
  onOpen(id: string): void;
  onPage(page: number): void;
}

/**
 * Render the triage queue exactly as the API returned it: same row order,
 * scores shown to 2 decimals, no client-side sorting or filtering.
 */
export function renderQueue(container: HTMLElement, page: QueuePage, handlers: QueueHandlers): void {
  container.replaceChildren();

  if (page.items.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No articles in the queue.";
    container.appendChild(empty);
    return;
  }

  const table = document.createElement("table");
  table.className = "queue-table";
  const head = document.createElement("tr");
  for (const label of ["Rank", "Article", "Score", "Posts", "Status"]) {
    const th = document.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);

  for (const item of page.items) {
    const row = document.createElement("tr");
    row.className = `queue-row status-${item.status}`;
    row.dataset.articleId = item.id;
    row.dataset.url = item.url;

    const rank = document.createElement("td");
    rank.textContent = String(item.rank);
    const url = document.createElement("td");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = item.url;
    link.addEventListener("click", (ev) => {
      ev.preventDefault();
      handlers.onOpen(item.id);
    });
    url.appendChild(link);
    const score = document.createElement("td");
    score.className = "score";
    score.textContent = item.score.toFixed(2);
    const posts = document.createElement("td");
    posts.textContent = String(item.n_posts);
    const status = document.createElement("td");
    status.className = "status";
    status.textContent = item.status;

    row.append(rank, url, score, posts, status);
    table.appendChild(row);
  }
  container.appendChild(table);

  const nav = document.createElement("div");
  nav.className = "pagination";
  const prev = document.createElement("button");
  prev.textContent = "Prev";
  prev.disabled = page.page <= 1;
  prev.addEventListener("click", () => handlers.onPage(page.page - 1));
  const label = document.createElement("span");
  const pages = Math.max(1, Math.ceil(page.total / page.size));
  label.textContent = `page ${page.page} / ${pages}`;
  const next = document.createElement("button");
  next.textContent = "Next";
  next.disabled = page.page * page.size >= page.total;
  next.addEventListener("click", () => handlers.onPage(page.page + 1));
  nav.append(prev, label, next);
  container.appendChild(nav);
}
