"""Review-queue service core: serves the ranked triage queue to human
fact-checkers and persists their verdicts.

Persistence is a single append-only JSONL feedback log; all in-memory
state is rebuilt on start by replaying it. Scores and the model version
always reflect the latest (re)training, which consumes the base dataset
with feedback-corrected labels; verdict submission alone never rescores.
The version id is a content hash of (model kind, seed, dataset, feedback),
so a restart reproduces the exact same queue state.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

from ..corpus import (
    Article,
    ArticleLabel,
    DatasetError,
    KeywordList,
    Post,
    PostLabel,
    default_keywords,
    ensure_articles,
    keyword_spans,
    load_dataset,
)
from ..evaluation import CvResult, cross_validate
from ..experiment import FittedModel, TrainConfig, post_text, score_articles, train_text_model
from ..pipeline import RankedQueue, ScoredArticle, rank_articles

STATUS_PENDING = "pending"
STATUS_REVIEWED = "reviewed"


class ServiceError(Exception):
    status_code = 400
    error_code = "service_error"


class UnknownArticleError(ServiceError):
    status_code = 404
    error_code = "unknown_article"


class DuplicateVerdictError(ServiceError):
    status_code = 409
    error_code = "duplicate_verdict"


class InvalidVerdictError(ServiceError):
    status_code = 422
    error_code = "invalid_verdict"


@dataclass(frozen=True)
class Verdict:
    url: str
    article_label: ArticleLabel
    post_labels: dict[str, PostLabel] | None = None
    reviewer: str = ""
    timestamp: str = ""

    def to_record(self) -> dict:
        return {
            "url": self.url,
            "article_label": 1 if self.article_label == ArticleLabel.SUSPICIOUS else -1,
            "post_labels": None
            if self.post_labels is None
            else {pid: (1 if lab == PostLabel.SCP else -1) for pid, lab in self.post_labels.items()},
            "reviewer": self.reviewer,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Verdict":
        post_labels = rec.get("post_labels")
        return cls(
            url=rec["url"],
            article_label=ArticleLabel.SUSPICIOUS if rec["article_label"] == 1 else ArticleLabel.NOT_SUSPICIOUS,
            post_labels=None
            if post_labels is None
            else {pid: (PostLabel.SCP if v == 1 else PostLabel.NOT_SCP) for pid, v in post_labels.items()},
            reviewer=rec.get("reviewer", ""),
            timestamp=rec.get("timestamp", ""),
        )


class FeedbackLog:
    """Append-only JSONL of verdict records.

    Appends write one full line and fsync before returning, so a crash
    leaves the log either without the record or with it complete. A
    trailing line without a newline is treated as an interrupted write and
    ignored on replay.
    """

    def __init__(self, path):
        self.path = Path(path)

    def append(self, verdict: Verdict) -> None:
        line = json.dumps(verdict.to_record(), ensure_ascii=False) + "\n"
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())

    def read(self) -> list[Verdict]:
        if not self.path.exists():
            return []
        raw = self.path.read_text(encoding="utf-8")
        if not raw:
            return []
        complete, _, partial = raw.rpartition("\n")
        verdicts = []
        for lineno, line in enumerate(complete.splitlines(), 1):
            if not line.strip():
                continue
            try:
                verdicts.append(Verdict.from_record(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise DatasetError(f"bad feedback record ({exc})", lineno) from None
        return verdicts

    def fingerprint(self) -> str:
        data = self.path.read_bytes() if self.path.exists() else b""
        return hashlib.sha256(data).hexdigest()[:16]


def apply_feedback(posts: list[Post], articles: list[Article], verdicts: list[Verdict]):
    """Return copies of posts and articles with reviewer corrections
    applied; corrections override base labels.

    A not-suspicious article verdict flips every post of that article to
    NOT_SCP (forced by the at-least-one-SCP rule). A suspicious verdict
    only touches the posts it explicitly labels.
    """
    post_label: dict[str, PostLabel | None] = {p.id: p.label for p in posts}
    article_label: dict[str, ArticleLabel | None] = {a.url: a.label for a in articles}
    posts_of: dict[str, list[str]] = {a.url: list(a.post_ids) for a in articles}

    for verdict in verdicts:
        article_label[verdict.url] = verdict.article_label
        if verdict.post_labels:
            for pid, lab in verdict.post_labels.items():
                if pid in post_label:
                    post_label[pid] = lab
        if verdict.article_label == ArticleLabel.NOT_SUSPICIOUS:
            for pid in posts_of.get(verdict.url, []):
                post_label[pid] = PostLabel.NOT_SCP

    new_posts = [replace(p, label=post_label[p.id]) for p in posts]
    new_articles = [replace(a, label=article_label[a.url]) for a in articles]
    return new_posts, new_articles


@dataclass
class QueueState:
    queue: RankedQueue
    statuses: dict[str, str]
    verdicts: dict[str, Verdict]
    model_version: str
    fitted: FittedModel
    post_scores: dict[str, float]
    posts: list[Post] = field(default_factory=list)
    articles: list[Article] = field(default_factory=list)

    def snapshot(self) -> dict:
        """Comparable view of the state (used by replay checks)."""
        return {
            "version": self.model_version,
            "statuses": dict(self.statuses),
            "verdicts": {url: v.to_record() for url, v in self.verdicts.items()},
            "queue": [(a.url, round(a.score, 12), a.contributing_post_id) for a in self.queue],
        }


def article_id(url: str) -> str:
    return hashlib.sha1(url.encode("utf-8")).hexdigest()[:16]


class TriageService:
    """Owns the queue state. Reads are lock-free against an immutable
    snapshot; verdict writes and retraining serialize on one lock."""

    def __init__(
        self,
        dataset_path,
        feedback_path,
        keywords: KeywordList | None = None,
        config: TrainConfig | None = None,
    ):
        self.dataset_path = Path(dataset_path)
        self.log = FeedbackLog(feedback_path)
        self.keywords = keywords or default_keywords()
        self.config = config or TrainConfig()
        self._lock = threading.Lock()
        posts, articles = load_dataset(self.dataset_path)
        self._base_posts = posts
        self._base_articles = ensure_articles(posts, articles)
        self._dataset_fp = hashlib.sha256(self.dataset_path.read_bytes()).hexdigest()[:16]
        self._metrics_cache: tuple[str, CvResult] | None = None
        self._state = self._build_state(self.config)

    # -- state construction --

    def _build_state(self, config: TrainConfig) -> QueueState:
        verdicts = self.log.read()
        posts, articles = apply_feedback(self._base_posts, self._base_articles, verdicts)
        fitted = train_text_model(posts, config)
        scores, scored_articles = score_articles(fitted, posts, articles)
        queue = rank_articles(scored_articles)
        reviewed = {v.url for v in verdicts}
        statuses = {a.url: (STATUS_REVIEWED if a.url in reviewed else STATUS_PENDING) for a in articles}
        version = hashlib.sha256(
            f"{config.kind}|{config.seed}|{self._dataset_fp}|{self.log.fingerprint()}".encode()
        ).hexdigest()[:12]
        return QueueState(
            queue=queue,
            statuses=statuses,
            verdicts={v.url: v for v in verdicts},
            model_version=version,
            fitted=fitted,
            post_scores=scores,
            posts=posts,
            articles=articles,
        )

    @property
    def state(self) -> QueueState:
        return self._state

    @property
    def model_version(self) -> str:
        return self._state.model_version

    # -- reads --

    def list_articles(self, status: str | None = None, page: int = 1, size: int = 20) -> dict:
        if page < 1 or size < 1:
            raise InvalidVerdictError("page and size must be >= 1")
        state = self._state
        rows = []
        by_id = {p.id: p for p in state.posts}
        for rank, scored in enumerate(state.queue, 1):
            row_status = state.statuses.get(scored.url, STATUS_PENDING)
            if status and row_status != status:
                continue
            contributor = by_id.get(scored.contributing_post_id)
            excerpt = post_text(contributor)[:200] if contributor else ""
            rows.append(
                {
                    "id": article_id(scored.url),
                    "url": scored.url,
                    "rank": rank,
                    "score": scored.score,
                    "n_posts": len(self._article_by_url(scored.url).post_ids),
                    "status": row_status,
                    "excerpt": excerpt,
                }
            )
        total = len(rows)
        start = (page - 1) * size
        return {"items": rows[start : start + size], "page": page, "size": size, "total": total}

    def _article_by_url(self, url: str) -> Article:
        for a in self._state.articles:
            if a.url == url:
                return a
        raise UnknownArticleError(f"no article with url {url!r}")

    def get_article(self, ident: str) -> dict:
        state = self._state
        target = None
        for a in state.articles:
            if article_id(a.url) == ident or a.url == ident:
                target = a
                break
        if target is None:
            raise UnknownArticleError(f"no article {ident!r}")
        by_id = {p.id: p for p in state.posts}
        posts = []
        for pid in target.post_ids:
            post = by_id.get(pid)
            if post is None:
                continue
            text = post_text(post)
            posts.append(
                {
                    "id": post.id,
                    "text": text,
                    "probability": state.post_scores.get(pid, 0.0),
                    "label": None if post.label is None else int(post.label),
                    "spans": [[s, e, term] for s, e, term in keyword_spans(text, self.keywords)],
                }
            )
        scored = next((a for a in state.queue if a.url == target.url), None)
        return {
            "id": article_id(target.url),
            "url": target.url,
            "title": target.title,
            "score": scored.score if scored else 0.0,
            "status": state.statuses.get(target.url, STATUS_PENDING),
            "posts": posts,
        }

    # -- writes --

    def submit_verdict(self, verdict: Verdict) -> dict:
        with self._lock:
            state = self._state
            if verdict.url not in state.statuses:
                raise UnknownArticleError(f"no article with url {verdict.url!r}")
            if state.statuses[verdict.url] == STATUS_REVIEWED:
                raise DuplicateVerdictError(f"article {verdict.url!r} already reviewed")
            self._validate_verdict(verdict, state)
            if not verdict.timestamp:
                verdict = replace(verdict, timestamp=datetime.now(timezone.utc).isoformat())
            self.log.append(verdict)
            state.statuses[verdict.url] = STATUS_REVIEWED
            state.verdicts[verdict.url] = verdict
            # keep the working label view current for later validations
            state.posts, state.articles = apply_feedback(state.posts, state.articles, [verdict])
            return {"url": verdict.url, "status": STATUS_REVIEWED}

    def _validate_verdict(self, verdict: Verdict, state: QueueState) -> None:
        article = self._article_by_url(verdict.url)
        labels = verdict.post_labels or {}
        unknown = set(labels) - set(article.post_ids)
        if unknown:
            raise InvalidVerdictError(f"post ids {sorted(unknown)} do not belong to article {verdict.url!r}")
        if verdict.article_label == ArticleLabel.NOT_SUSPICIOUS:
            if any(lab == PostLabel.SCP for lab in labels.values()):
                raise InvalidVerdictError("not-suspicious verdict cannot mark a post as suspicion-casting")
            return
        # suspicious: at least one supporting SCP post, explicit or effective
        if labels:
            if not any(lab == PostLabel.SCP for lab in labels.values()):
                raise InvalidVerdictError("suspicious verdict needs at least one suspicion-casting post")
            return
        by_id = {p.id: p for p in state.posts}
        effective = [by_id[pid].label for pid in article.post_ids if pid in by_id]
        if not any(lab == PostLabel.SCP for lab in effective if lab is not None):
            raise InvalidVerdictError(
                "suspicious verdict needs post labels naming at least one suspicion-casting post"
            )

    def retrain(self, kind: str | None = None, seed: int | None = None) -> str:
        """Rebuild the model and queue from the base dataset plus all
        feedback. On failure the previous state stays live."""
        with self._lock:
            config = self.config
            if kind is not None:
                config = replace(config, kind=kind)
            if seed is not None:
                config = replace(config, seed=seed)
            new_state = self._build_state(config)
            self.config = config
            self._state = new_state
            return new_state.model_version

    # -- metrics --

    def metrics(self, k: int = 5) -> CvResult:
        version = self._state.model_version
        if self._metrics_cache and self._metrics_cache[0] == version:
            return self._metrics_cache[1]
        result = cross_validate(self.config, self._state.posts, k=k, seed=self.config.seed, level="post")
        self._metrics_cache = (version, result)
        return result
