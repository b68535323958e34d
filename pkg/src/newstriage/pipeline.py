"""Article scoring and ranking on top of per-post probabilities.

An article's suspiciousness score is the maximum probability over its
posts; it is classified suspicious when the score strictly exceeds 0.5.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field


class EmptyArticleError(Exception):
    pass


@dataclass
class ScoredPost:
    post_id: str
    probability: float
    flagged_empty: bool = False

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


@dataclass
class ScoredArticle:
    url: str
    score: float
    contributing_post_id: str
    predicted_label: int
    flagged_empty: bool = False


@dataclass
class RankedQueue:
    articles: list[ScoredArticle] = field(default_factory=list)

    def __iter__(self):
        return iter(self.articles)

    def __len__(self):
        return len(self.articles)


def score_article(url: str, posts: list[ScoredPost]) -> ScoredArticle:
    """Max post probability; the contributor is the first post attaining
    it."""
    if not posts:
        raise EmptyArticleError(f"article {url!r} has no scored posts")
    best = posts[0]
    for post in posts[1:]:
        if post.probability > best.probability:
            best = post
    score = best.probability
    return ScoredArticle(
        url=url,
        score=score,
        contributing_post_id=best.post_id,
        predicted_label=1 if score > 0.5 else 0,
        flagged_empty=all(p.flagged_empty for p in posts),
    )


def classify_article(scored: ScoredArticle) -> int:
    """1 iff the score strictly exceeds 0.5."""
    return 1 if scored.score > 0.5 else 0


def rank_articles(scored: list[ScoredArticle]) -> RankedQueue:
    """Descending score; ties ordered by ascending article url."""
    return RankedQueue(sorted(scored, key=lambda a: (-a.score, a.url)))


def write_queue_csv(queue: RankedQueue, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "url", "score", "contributing_post_id", "predicted_label"])
        for rank, article in enumerate(queue, 1):
            writer.writerow([rank, article.url, f"{article.score:.6f}", article.contributing_post_id, article.predicted_label])
