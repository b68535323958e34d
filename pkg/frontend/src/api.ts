import type { ArticleDetail, MetricsOut, QueuePage, VerdictAck, VerdictBody } from "./types.js";

/** Error carrying the service's {error_code, message} body. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public errorCode: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    let code = "http_error";
    let message = resp.statusText;
    try {
      const body = await resp.json();
      code = body.error_code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, code, message);
  }
  return (await resp.json()) as T;
}

export interface TriageApi {
  fetchQueue(page: number, size: number, status?: string): Promise<QueuePage>;
  fetchArticle(id: string): Promise<ArticleDetail>;
  submitVerdict(verdict: VerdictBody): Promise<VerdictAck>;
  fetchMetrics(): Promise<MetricsOut>;
}

export function createApi(base = ""): TriageApi {
  return {
    fetchQueue(page, size, status) {
      const params = new URLSearchParams({ page: String(page), size: String(size) });
      if (status) params.set("status", status);
      return request<QueuePage>(`${base}/api/queue?${params}`);
    },
    fetchArticle(id) {
      return request<ArticleDetail>(`${base}/api/articles/${encodeURIComponent(id)}`);
    },
    submitVerdict(verdict) {
      return request<VerdictAck>(`${base}/api/verdicts`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(verdict),
      });
    },
    fetchMetrics() {
      return request<MetricsOut>(`${base}/api/metrics`);
    },
  };
}
