"""Request/response models for the review-queue API.

Labels travel as +1/-1, matching the dataset file convention.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, field_validator


class ArticleSummary(BaseModel):
    id: str
    url: str
    rank: int
    score: float
    n_posts: int
    status: str
    excerpt: str


class QueuePage(BaseModel):
    items: list[ArticleSummary]
    page: int
    size: int
    total: int


class PostDetail(BaseModel):
    id: str
    text: str
    probability: float
    label: int | None = None
    spans: list[list] = Field(default_factory=list)


class ArticleDetail(BaseModel):
    id: str
    url: str
    title: str | None = None
    score: float
    status: str
    posts: list[PostDetail]


class VerdictIn(BaseModel):
    url: str
    article_label: int
    post_labels: dict[str, int] | None = None
    reviewer: str = ""
    timestamp: str = ""

    @field_validator("article_label")
    @classmethod
    def _check_article_label(cls, v: int) -> int:
        if v not in (1, -1):
            raise ValueError("article_label must be 1 or -1")
        return v

    @field_validator("post_labels")
    @classmethod
    def _check_post_labels(cls, v):
        if v is not None and any(lab not in (1, -1) for lab in v.values()):
            raise ValueError("post labels must be 1 or -1")
        return v


class VerdictAck(BaseModel):
    url: str
    status: str


class RetrainIn(BaseModel):
    model: str | None = None
    seed: int | None = None


class RetrainOut(BaseModel):
    model_version: str


class FoldMetrics(BaseModel):
    fold: str
    precision: float
    recall: float
    f1: float


class MetricsOut(BaseModel):
    model: str
    seed: int
    model_version: str
    folds: list[FoldMetrics]
    aggregate: FoldMetrics


class ErrorOut(BaseModel):
    error_code: str
    message: str
