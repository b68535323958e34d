/** API payload shapes, mirrored from the service's response models. */

export interface ArticleSummary {
  id: string;
  url: string;
  rank: number;
  score: number;
  n_posts: number;
  status: "pending" | "reviewed";
  excerpt: string;
}

export interface QueuePage {
  items: ArticleSummary[];
  page: number;
  size: number;
  total: number;
}

/** [start, end, keyword] character span supplied by the API. */
export type HighlightSpan = [number, number, string];

export interface PostDetail {
  id: string;
  text: string;
  probability: number;
  label: number | null;
  spans: HighlightSpan[];
}

export interface ArticleDetail {
  id: string;
  url: string;
  title: string | null;
  score: number;
  status: "pending" | "reviewed";
  posts: PostDetail[];
}

export interface VerdictBody {
  url: string;
  article_label: 1 | -1;
  post_labels: Record<string, 1 | -1> | null;
  reviewer: string;
}

export interface VerdictAck {
  url: string;
  status: string;
}

export interface FoldMetrics {
  fold: string;
  precision: number;
  recall: number;
  f1: number;
}

export interface MetricsOut {
  model: string;
  seed: number;
  model_version: string;
  folds: FoldMetrics[];
  aggregate: FoldMetrics;
}
