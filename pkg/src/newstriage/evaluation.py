"""Positive-class metrics, Recall@K, stratified cross-validation and
learning curves.

Cross-validation rotates test / development / training parts over k
stratified folds (3 train, 1 dev, 1 test at k=5); metrics are pooled over
the test folds by summing confusion counts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import Article, Post, stratified_folds
from .experiment import TrainConfig, score_articles, score_posts, post_text, train_text_model, trainable_posts
from .pipeline import RankedQueue, rank_articles


@dataclass
class ClassificationReport:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp > 0 else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn > 0 else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass
class CvResult:
    model_kind: str
    seed: int
    folds: list[ClassificationReport]
    aggregate: ClassificationReport
    queue: RankedQueue | None = None
    gold_by_url: dict[str, int] = field(default_factory=dict)


@dataclass
class LearningPoint:
    fraction: float
    f1: float | None

    @property
    def valid(self) -> bool:
        return self.f1 is not None


def classification_report(predictions, golds) -> ClassificationReport:
    pred = np.asarray(predictions, dtype=np.int64)
    gold = np.asarray(golds, dtype=np.int64)
    if pred.shape != gold.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions vs {gold.size} golds")
    tp = int(np.sum((pred == 1) & (gold == 1)))
    fp = int(np.sum((pred == 1) & (gold == 0)))
    fn = int(np.sum((pred == 0) & (gold == 1)))
    tn = int(np.sum((pred == 0) & (gold == 0)))
    return ClassificationReport(tp=tp, fp=fp, fn=fn, tn=tn)


def recall_at_k(queue: RankedQueue, golds: dict[str, int], k: int, mode: str = "positives") -> float:
    """Fraction of gold-suspicious articles found in the top k.

    mode="positives" divides by the gold-positive count; mode="total"
    divides by the number of articles in the queue.
    """
    if not 1 <= k <= len(queue):
        raise ValueError(f"k={k} outside [1, {len(queue)}]")
    if mode not in ("positives", "total"):
        raise ValueError(f"unknown recall mode {mode!r}")
    hits = sum(golds.get(article.url, 0) for article in list(queue)[:k])
    if mode == "positives":
        positives = sum(golds.values())
        return hits / positives if positives else 0.0
    return hits / len(queue)


def recall_curve(queue: RankedQueue, golds: dict[str, int], mode: str = "positives") -> list[tuple[int, float]]:
    """(K, recall@K) for every K from 1 to the queue length."""
    flags = np.array([golds.get(a.url, 0) for a in queue], dtype=np.float64)
    cum = np.cumsum(flags)
    if mode == "positives":
        norm = float(sum(golds.values())) or 1.0
    elif mode == "total":
        norm = float(len(queue)) or 1.0
    else:
        raise ValueError(f"unknown recall mode {mode!r}")
    return [(k, float(cum[k - 1] / norm)) for k in range(1, len(queue) + 1)]


def _subsample_stratified(indices: np.ndarray, labels: np.ndarray, fraction: float, rng) -> np.ndarray:
    if fraction >= 1.0:
        return indices
    picked = []
    for cls in np.unique(labels[indices]):
        cls_idx = indices[labels[indices] == cls]
        n_keep = int(round(fraction * cls_idx.size))
        if n_keep > 0:
            picked.append(rng.permutation(cls_idx)[:n_keep])
    if not picked:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate(picked))


def cross_validate(
    cfg: TrainConfig,
    posts: list[Post],
    articles: list[Article] | None = None,
    k: int = 5,
    seed: int = 42,
    level: str = "post",
    train_fraction: float = 1.0,
) -> CvResult:
    """Stratified k-fold evaluation, deterministic given the seed.

    level="post": samples are labeled posts, metrics are post-level.
    level="article": folds stratify over article labels; the model trains
    on the posts of training articles and each test article is scored by
    max aggregation. The pooled scored articles form `result.queue`.
    """
    if k < 3:
        raise ValueError("k must be >= 3: the rotation needs train, dev and test parts")
    if level == "post":
        return _cv_posts(cfg, posts, k, seed, train_fraction)
    if level == "article":
        if articles is None:
            raise ValueError("article-level cross-validation needs article records")
        return _cv_articles(cfg, posts, articles, k, seed, train_fraction)
    raise ValueError(f"unknown level {level!r}")


def _cv_posts(cfg, posts, k, seed, train_fraction) -> CvResult:
    samples = [p for p in posts if p.label is not None]
    if not samples:
        raise ValueError("no labeled posts")
    labels = np.array([int(p.label) for p in samples], dtype=np.int64)
    folds = stratified_folds(labels, k, seed)

    reports = []
    for f in range(k):
        test_idx = folds.test_indices(f)
        dev_idx = folds.test_indices((f + 1) % k)
        train_idx = np.setdiff1d(folds.train_indices(f), dev_idx)
        train_idx = _subsample_stratified(train_idx, labels, train_fraction, np.random.default_rng((seed, f)))
        train = [samples[i] for i in train_idx]
        dev = [samples[i] for i in dev_idx]
        fitted = train_text_model(train, replace(cfg, seed=seed), dev_posts=dev)
        test = [samples[i] for i in test_idx]
        probs = score_posts(fitted, test)
        preds = [1 if probs[p.id] > 0.5 else 0 for p in test]
        reports.append(classification_report(preds, [int(p.label) for p in test]))
    return CvResult(model_kind=cfg.kind, seed=seed, folds=reports, aggregate=_pool(reports))


def _cv_articles(cfg, posts, articles, k, seed, train_fraction) -> CvResult:
    labeled = [a for a in articles if a.label is not None]
    if not labeled:
        raise ValueError("no labeled articles")
    art_labels = np.array([int(a.label) for a in labeled], dtype=np.int64)
    folds = stratified_folds(art_labels, k, seed)
    by_id = {p.id: p for p in posts}

    reports = []
    pooled = []
    golds: dict[str, int] = {}
    for f in range(k):
        test_idx = folds.test_indices(f)
        dev_idx = folds.test_indices((f + 1) % k)
        train_idx = np.setdiff1d(folds.train_indices(f), dev_idx)
        train_idx = _subsample_stratified(train_idx, art_labels, train_fraction, np.random.default_rng((seed, f)))

        def fold_posts(idx):
            out = []
            for i in idx:
                out.extend(by_id[pid] for pid in labeled[i].post_ids if pid in by_id)
            return out

        fitted = train_text_model(fold_posts(train_idx), replace(cfg, seed=seed), dev_posts=fold_posts(dev_idx))
        test_articles = [labeled[i] for i in test_idx]
        _, scored = score_articles(fitted, posts, test_articles)
        preds = [a.predicted_label for a in scored]
        fold_golds = [int(a.label) for a in test_articles]
        reports.append(classification_report(preds, fold_golds))
        pooled.extend(scored)
        golds.update({a.url: int(a.label) for a in test_articles})
    return CvResult(
        model_kind=cfg.kind,
        seed=seed,
        folds=reports,
        aggregate=_pool(reports),
        queue=rank_articles(pooled),
        gold_by_url=golds,
    )


def _pool(reports: list[ClassificationReport]) -> ClassificationReport:
    return ClassificationReport(
        tp=sum(r.tp for r in reports),
        fp=sum(r.fp for r in reports),
        fn=sum(r.fn for r in reports),
        tn=sum(r.tn for r in reports),
    )


def learning_curve(
    cfg: TrainConfig,
    posts: list[Post],
    fractions: list[float],
    articles: list[Article] | None = None,
    k: int = 5,
    seed: int = 42,
    level: str = "post",
) -> list[LearningPoint]:
    """Aggregate F1 at growing training fractions; the test folds stay
    fixed. A fraction whose subsample collapses to one class is marked
    invalid rather than failing the sweep."""
    if sorted(fractions) != list(fractions):
        raise ValueError("fractions must be sorted ascending")
    if any(not 0.0 < f <= 1.0 for f in fractions):
        raise ValueError("fractions must lie in (0, 1]")
    points = []
    for fraction in fractions:
        try:
            result = cross_validate(cfg, posts, articles=articles, k=k, seed=seed, level=level, train_fraction=fraction)
            points.append(LearningPoint(fraction=fraction, f1=result.aggregate.f1))
        except ValueError:
            points.append(LearningPoint(fraction=fraction, f1=None))
    return points


def write_report_csv(result: CvResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model", "fold", "precision", "recall", "f1"])
        for i, report in enumerate(result.folds):
            writer.writerow([result.model_kind, i, f"{report.precision:.6f}", f"{report.recall:.6f}", f"{report.f1:.6f}"])
        agg = result.aggregate
        writer.writerow([result.model_kind, "aggregate", f"{agg.precision:.6f}", f"{agg.recall:.6f}", f"{agg.f1:.6f}"])


def write_recall_curve_csv(points: list[tuple[int, float]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["K", "recall"])
        for k, value in points:
            writer.writerow([k, f"{value:.6f}"])


def write_learning_curve_csv(points: list[LearningPoint], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fraction", "f1"])
        for point in points:
            writer.writerow([f"{point.fraction:g}", "" if point.f1 is None else f"{point.f1:.6f}"])
