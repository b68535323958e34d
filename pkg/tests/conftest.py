"""Shared fixtures: synthetic corpora with a planted vocabulary signal."""

from __future__ import annotations

import numpy as np
import pytest

from newstriage.corpus import Post, PostLabel, ensure_articles, save_dataset


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        name = report.nodeid.split("::")[-1]
        print(f"  [ACCEPTANCE] {name}: {outcome}", flush=True)

FILLER = [f"word{i}" for i in range(50)]
MARKERS = ["hoaxish", "dubioso", "debunkit"]


def make_planted_posts(
    n: int,
    pos_rate: float = 0.15,
    seed: int = 0,
    marker_prob: float = 0.97,
    noise_prob: float = 0.01,
    n_urls: int | None = None,
) -> list[Post]:
    """Posts whose positive class is signalled by marker tokens; texts are
    already clean (comment_text populated)."""
    rng = np.random.default_rng(seed)
    n_urls = n_urls or max(2, n // 3)
    posts = []
    for i in range(n):
        positive = bool(rng.random() < pos_rate)
        tokens = [str(t) for t in rng.choice(FILLER, size=int(rng.integers(5, 12)))]
        if positive and rng.random() < marker_prob:
            tokens.insert(int(rng.integers(0, len(tokens))), str(rng.choice(MARKERS)))
        elif not positive and rng.random() < noise_prob:
            tokens.insert(0, str(rng.choice(MARKERS)))
        text = " ".join(tokens)
        posts.append(
            Post(
                id=f"p{i}",
                article_url=f"https://news.example/{int(rng.integers(0, n_urls))}",
                raw_text=text,
                comment_text=text,
                label=PostLabel.SCP if positive else PostLabel.NOT_SCP,
            )
        )
    return posts


def write_planted_dataset(path, n: int, seed: int = 0, **kwargs):
    posts = make_planted_posts(n, seed=seed, **kwargs)
    articles = ensure_articles(posts, [])
    save_dataset(path, posts, articles)
    return posts, articles


@pytest.fixture
def planted_posts():
    return make_planted_posts(300, seed=11)


@pytest.fixture
def small_dataset_path(tmp_path):
    path = tmp_path / "dataset.jsonl"
    write_planted_dataset(path, 150, seed=5, n_urls=40)
    return path
