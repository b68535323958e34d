import type { ArticleDetail, ArticleSummary, QueuePage } from "../src/types.js";

export function summary(overrides: Partial<ArticleSummary> = {}): ArticleSummary {
  return {
    id: "id-a",
    url: "https://news.example/a",
    rank: 1,
    score: 0.875,
    n_posts: 3,
    status: "pending",
    excerpt: "looks dubious",
    ...overrides,
  };
}

export function queuePage(items: ArticleSummary[], page = 1, size = 20): QueuePage {
  return { items, page, size, total: items.length };
}

export function articleDetail(overrides: Partial<ArticleDetail> = {}): ArticleDetail {
  return {
    id: "id-a",
    url: "https://news.example/a",
    title: null,
    score: 0.875,
    status: "pending",
    posts: [
      { id: "p1", text: "looks like 誤報 to me", probability: 0.875, label: null, spans: [[11, 13, "誤報"]] },
      { id: "p2", text: "nice weather", probability: 0.12, label: null, spans: [] },
    ],
    ...overrides,
  };
}

export async function waitFor(check: () => boolean, timeoutMs = 5000): Promise<void> {
  const start = Date.now();
  while (!check()) {
    if (Date.now() - start > timeoutMs) throw new Error("waitFor timed out");
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
}
