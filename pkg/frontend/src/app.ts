import { ApiError, type TriageApi } from "./api.js";
import { renderArticle, suggestedLabel, type ToggleState } from "./articleView.js";
import { renderQueue } from "./queueView.js";
import type { ArticleDetail, QueuePage, VerdictBody } from "./types.js";

const PAGE_SIZE = 20;

/**
 * Review session controller. The server is the source of truth: the queue
 * is rendered verbatim from the API, verdicts are optimistic but rolled
 * back whenever the POST fails.
 */
export class ReviewApp {
  private page = 1;
  private queue: QueuePage | null = null;
  private article: ArticleDetail | null = null;
  private articleLabel: 1 | -1 | null = null;
  private toggles: ToggleState = new Map();

  private queueEl: HTMLElement;
  private articleEl: HTMLElement;
  private bannerEl: HTMLElement;
  private metricsEl: HTMLElement;

  constructor(
    private root: HTMLElement,
    private api: TriageApi,
    private reviewer = "reviewer",
  ) {
    this.bannerEl = this.section("banner");
    this.queueEl = this.section("queue");
    this.articleEl = this.section("article");
    this.metricsEl = this.section("metrics");
  }

  private section(id: string): HTMLElement {
    const el = document.createElement("section");
    el.id = id;
    this.root.appendChild(el);
    return el;
  }

  async start(): Promise<void> {
    await this.loadQueue(1);
    void this.loadMetrics();
  }

  // --- queue ---

  async loadQueue(page: number): Promise<void> {
    try {
      const data = await this.api.fetchQueue(page, PAGE_SIZE);
      this.page = page;
      this.queue = data;
      this.clearBanner();
      this.renderQueue();
    } catch (err) {
      this.showBanner(`Could not load the queue (${describe(err)}). Showing stale data.`, () =>
        this.loadQueue(page),
      );
      this.queueEl.classList.add("stale");
    }
  }

  private renderQueue(): void {
    if (!this.queue) return;
    this.queueEl.classList.remove("stale");
    renderQueue(this.queueEl, this.queue, {
      onOpen: (id) => void this.openArticle(id),
      onPage: (page) => void this.loadQueue(page),
    });
  }

  // --- article detail ---

  async openArticle(id: string): Promise<void> {
    try {
      this.article = await this.api.fetchArticle(id);
      this.articleLabel = null;
      this.toggles = new Map();
      this.clearBanner();
      this.renderArticle();
    } catch (err) {
      this.showBanner(`Could not load the article (${describe(err)}).`, () => this.openArticle(id));
    }
  }

  private renderArticle(): void {
    if (!this.article) {
      this.articleEl.replaceChildren();
      return;
    }
    renderArticle(
      this.articleEl,
      this.article,
      { articleLabel: this.articleLabel, toggles: this.toggles },
      {
        onToggle: (postId, value) => {
          if (value === null) this.toggles.delete(postId);
          else this.toggles.set(postId, value);
          // marking posts auto-suggests the article verdict
          const implied = suggestedLabel(this.toggles);
          if (implied !== null) this.articleLabel = implied;
          this.renderArticle();
        },
        onArticleLabel: (value) => {
          this.articleLabel = value;
          this.renderArticle();
        },
        onSubmit: () => void this.submitVerdict(),
      },
    );
  }

  // --- verdict ---

  async submitVerdict(): Promise<void> {
    if (!this.article || this.articleLabel === null) return;
    const article = this.article;
    const body: VerdictBody = {
      url: article.url,
      article_label: this.articleLabel,
      post_labels: this.toggles.size ? Object.fromEntries(this.toggles) : null,
      reviewer: this.reviewer,
    };

    // optimistic: mark the row reviewed right away
    const row = this.queue?.items.find((item) => item.url === article.url);
    const previousStatus = row?.status;
    if (row) row.status = "reviewed";
    article.status = "reviewed";
    this.renderQueue();
    this.renderArticle();

    try {
      await this.api.submitVerdict(body);
      this.clearBanner();
      await this.openNextPending();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // somebody got there first; the server state stands
        await this.openArticle(article.id);
        await this.loadQueue(this.page);
        this.showBanner("This article was already reviewed; verdict not recorded.");
      } else {
        if (row && previousStatus) row.status = previousStatus;
        article.status = "pending";
        this.renderQueue();
        this.renderArticle();
        this.showBanner(`Verdict not saved (${describe(err)}).`, () => this.submitVerdict());
      }
    }
  }

  private async openNextPending(): Promise<void> {
    await this.loadQueue(this.page);
    const next = this.queue?.items.find((item) => item.status === "pending");
    if (next) {
      await this.openArticle(next.id);
    } else {
      this.article = null;
      this.renderArticle();
      const done = document.createElement("p");
      done.className = "empty-state";
      done.textContent = "No pending articles on this page.";
      this.articleEl.appendChild(done);
    }
  }

  // --- metrics panel ---

  async loadMetrics(): Promise<void> {
    try {
      const metrics = await this.api.fetchMetrics();
      this.metricsEl.replaceChildren();
      const heading = document.createElement("h3");
      heading.textContent = `Model ${metrics.model} (version ${metrics.model_version})`;
      const agg = document.createElement("p");
      agg.textContent =
        `precision ${metrics.aggregate.precision.toFixed(2)} · ` +
        `recall ${metrics.aggregate.recall.toFixed(2)} · ` +
        `F1 ${metrics.aggregate.f1.toFixed(2)}`;
      this.metricsEl.append(heading, agg);
    } catch {
      // metrics are informational; leave the panel empty on failure
    }
  }

  // --- banner ---

  private showBanner(message: string, retry?: () => Promise<void> | void): void {
    this.bannerEl.replaceChildren();
    const note = document.createElement("span");
    note.textContent = message;
    this.bannerEl.appendChild(note);
    if (retry) {
      const button = document.createElement("button");
      button.textContent = "Retry";
      button.addEventListener("click", () => void retry());
      this.bannerEl.appendChild(button);
    }
    this.bannerEl.className = "banner visible";
  }

  private clearBanner(): void {
    this.bannerEl.replaceChildren();
    this.bannerEl.className = "banner";
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.errorCode}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
