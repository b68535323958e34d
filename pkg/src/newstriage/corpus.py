"""Post corpus handling: candidate filtering, comment cleanup, article
grouping, label derivation, stratified folds and JSONL dataset files.

Dataset files are UTF-8 JSONL, one record per line:

    {"type": "post", "id": str, "url": str, "raw": str,
     "comment": str?, "label": 1 | -1 | null}
    {"type": "article", "url": str, "title": str?, "post_ids": [str],
     "label": 1 | -1 | null}

Labels are +1/-1 on disk (0 is accepted as a negative on input) and are
carried internally as enums with values {1, 0}.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field, replace
from enum import IntEnum
from importlib import resources
from urllib.parse import urlsplit, urlunsplit

import numpy as np

URL_PREFIXES = ("http://", "https://")
HASHTAG_MARKS = "#＃"
MENTION_MARKS = "@＠"

DEFAULT_KEYWORDS = ["誤報", "捏造", "虚偽", "misinformation", "fabrication", "untrue"]


class PostLabel(IntEnum):
    NOT_SCP = 0
    SCP = 1


class ArticleLabel(IntEnum):
    NOT_SUSPICIOUS = 0
    SUSPICIOUS = 1


class DatasetError(Exception):
    """Malformed dataset file; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnlabeledPostError(Exception):
    pass


class InsufficientClassSizeError(Exception):
    pass


@dataclass
class Post:
    """One social-media message referring to an article.

    ``comment_text`` is the cleaned comment part and stays ``None`` until
    :func:`preprocess` has run. Posts whose comment is empty after cleanup
    are flagged and excluded from training; they score 0.0 at inference.
    """

    id: str
    article_url: str
    raw_text: str
    comment_text: str | None = None
    label: PostLabel | None = None
    source_meta: dict | None = None
    empty_after_preprocess: bool = False


@dataclass
class Article:
    url: str
    title: str | None = None
    post_ids: list[str] = field(default_factory=list)
    label: ArticleLabel | None = None


@dataclass
class KeywordList:
    """Nonempty list of distinct, nonempty keywords."""

    terms: list[str]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("keyword list must not be empty")
        seen = set()
        for term in self.terms:
            if not term:
                raise ValueError("keyword list contains an empty string")
            if term in seen:
                raise ValueError(f"duplicate keyword {term!r}")
            seen.add(term)


@dataclass
class FoldAssignment:
    """Fold index per sample position, folds numbered 0..k-1."""

    assignments: np.ndarray
    k: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _is_cased(term: str) -> bool:
    # Scripts without case (kana, kanji, ...) have upper() == lower().
    return term.upper() != term.lower()


def filter_candidates(posts: list[Post], keywords: KeywordList) -> list[Post]:
    """Keep posts whose raw text contains at least one keyword.

    Matching is plain substring containment on NFC-normalized text;
    keywords from cased scripts match case-insensitively. Input order is
    preserved.
    """
    probes = []
    for term in keywords.terms:
        term = _nfc(term)
        probes.append((term.casefold(), True) if _is_cased(term) else (term, False))
    out = []
    for post in posts:
        text = _nfc(post.raw_text)
        folded = text.casefold()
        if any(term in (folded if fold else text) for term, fold in probes):
            out.append(post)
    return out


def keyword_spans(text: str, keywords: KeywordList) -> list[tuple[int, int, str]]:
    """Character offsets [start, end) of every keyword hit in ``text``.

    Used for review-UI highlighting; offsets index the string as given.
    """
    spans = []
    for term in keywords.terms:
        if _is_cased(term):
            for m in re.finditer(re.escape(term), text, flags=re.IGNORECASE):
                spans.append((m.start(), m.end(), term))
        else:
            start = text.find(term)
            while start >= 0:
                spans.append((start, start + len(term), term))
                start = text.find(term, start + 1)
    return sorted(spans)


def _is_noise_token(token: str) -> bool:
    return token.startswith(URL_PREFIXES) or token[0] in HASHTAG_MARKS or token[0] in MENTION_MARKS


def preprocess(post: Post, article_title: str | None = None) -> Post:
    """Populate ``comment_text``: the raw text minus the article title,
    URLs, hashtag tokens and @-mention tokens, with whitespace collapsed.

    URL/hashtag/mention tokens are maximal whitespace-delimited runs
    starting with "http(s)://", "#"/"＃" or "@"/"＠". The raw text is left
    untouched; an all-noise post comes back flagged instead of raising.
    """
    if not post.raw_text:
        raise ValueError("raw_text is empty")
    text = post.raw_text
    if article_title:
        text = text.replace(article_title, " ")
    kept = [tok for tok in text.split() if not _is_noise_token(tok)]
    comment = " ".join(kept)
    return replace(post, comment_text=comment, empty_after_preprocess=comment == "")


def derive_article_label(article: Article, posts: list[Post]) -> ArticleLabel:
    """Suspicious iff at least one referenced post is labeled SCP."""
    by_id = {p.id: p for p in posts}
    suspicious = False
    for pid in article.post_ids:
        post = by_id.get(pid)
        if post is None or post.label is None:
            raise UnlabeledPostError(f"post {pid!r} of article {article.url} has no label")
        suspicious = suspicious or post.label == PostLabel.SCP
    return ArticleLabel.SUSPICIOUS if suspicious else ArticleLabel.NOT_SUSPICIOUS


def normalize_url(url: str) -> str:
    """Strip the fragment, lowercase scheme and host, keep the query."""
    url = url.strip()
    parts = urlsplit(url)
    if not parts.netloc:
        return url
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), parts.path, parts.query, ""))


def group_posts_by_article(posts: list[Post]) -> list[Article]:
    """One article per distinct normalized URL, in first-appearance order;
    each article's post_ids preserve input order."""
    groups: dict[str, list[str]] = {}
    for post in posts:
        if not post.article_url:
            raise ValueError(f"post {post.id!r} has no article_url")
        groups.setdefault(normalize_url(post.article_url), []).append(post.id)
    return [Article(url=url, post_ids=ids) for url, ids in groups.items()]


def ensure_articles(posts: list[Post], articles: list[Article]) -> list[Article]:
    """Group posts into articles when no article records exist, and derive
    missing article labels wherever every referenced post is labeled."""
    if not articles:
        articles = group_posts_by_article(posts)
    out = []
    for article in articles:
        if article.label is None:
            try:
                article = replace(article, label=derive_article_label(article, posts))
            except UnlabeledPostError:
                pass
        out.append(article)
    return out


def stratified_folds(sample_labels, k: int, seed: int) -> FoldAssignment:
    """Assign each sample to one of ``k`` folds, keeping per-fold class
    counts within 1 of exact proportionality. Deterministic given seed."""
    if k < 2:
        raise ValueError("k must be >= 2")
    y = np.asarray(sample_labels, dtype=int)
    rng = np.random.default_rng(seed)
    assignments = np.full(y.size, -1, dtype=int)
    for offset, cls in enumerate(np.unique(y)):
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            raise InsufficientClassSizeError(
                f"class {cls} has {idx.size} samples, need at least {k}"
            )
        rng.shuffle(idx)
        # round-robin deal; the offset spreads remainders across folds
        assignments[idx] = (np.arange(idx.size) + offset) % k
    return FoldAssignment(assignments, k)


def _post_label_from_raw(value, line=None) -> PostLabel | None:
    if value is None:
        return None
    if value == 1:
        return PostLabel.SCP
    if value in (-1, 0):
        return PostLabel.NOT_SCP
    raise DatasetError(f"unknown label value {value!r}", line)


def _article_label_from_raw(value, line=None) -> ArticleLabel | None:
    if value is None:
        return None
    if value == 1:
        return ArticleLabel.SUSPICIOUS
    if value in (-1, 0):
        return ArticleLabel.NOT_SUSPICIOUS
    raise DatasetError(f"unknown label value {value!r}", line)


def load_dataset(path) -> tuple[list[Post], list[Article]]:
    posts: list[Post] = []
    articles: list[Article] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw_line in enumerate(fh, 1):
            line = raw_line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"invalid JSON ({exc.msg})", lineno) from None
            if not isinstance(rec, dict) or "type" not in rec:
                raise DatasetError("record must be an object with a 'type' field", lineno)
            kind = rec["type"]
            if kind == "post":
                try:
                    pid, url, raw = str(rec["id"]), rec["url"], rec["raw"]
                except KeyError as exc:
                    raise DatasetError(f"post record missing field {exc}", lineno) from None
                if pid in seen_ids:
                    raise DatasetError(f"duplicate post id {pid!r}", lineno)
                seen_ids.add(pid)
                comment = rec.get("comment")
                posts.append(
                    Post(
                        id=pid,
                        article_url=url,
                        raw_text=raw,
                        comment_text=comment,
                        label=_post_label_from_raw(rec.get("label"), lineno),
                        source_meta=rec.get("meta"),
                        empty_after_preprocess=comment == "",
                    )
                )
            elif kind == "article":
                if "url" not in rec:
                    raise DatasetError("article record missing field 'url'", lineno)
                articles.append(
                    Article(
                        url=rec["url"],
                        title=rec.get("title"),
                        post_ids=[str(x) for x in rec.get("post_ids", [])],
                        label=_article_label_from_raw(rec.get("label"), lineno),
                    )
                )
            else:
                raise DatasetError(f"unknown record type {kind!r}", lineno)
    return posts, articles


def save_dataset(path, posts: list[Post], articles: list[Article]) -> None:
    """Inverse of :func:`load_dataset`; load(save(...)) is the identity."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            rec: dict = {"type": "post", "id": p.id, "url": p.article_url, "raw": p.raw_text}
            if p.comment_text is not None:
                rec["comment"] = p.comment_text
            rec["label"] = None if p.label is None else (1 if p.label == PostLabel.SCP else -1)
            if p.source_meta is not None:
                rec["meta"] = p.source_meta
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
        for a in articles:
            rec = {"type": "article", "url": a.url}
            if a.title is not None:
                rec["title"] = a.title
            rec["post_ids"] = list(a.post_ids)
            rec["label"] = None if a.label is None else (1 if a.label == ArticleLabel.SUSPICIOUS else -1)
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_keywords(path) -> KeywordList:
    """Read a keyword file: one keyword per line, '#' lines are comments.
    Repeated keywords are dropped, keeping the first occurrence."""
    terms = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for raw_line in fh:
            term = raw_line.strip()
            if not term or term.startswith("#"):
                continue
            if term not in seen:
                seen.add(term)
                terms.append(term)
    return KeywordList(terms)


def default_keywords() -> KeywordList:
    try:
        text = resources.files("newstriage").joinpath("data/keywords.txt").read_text("utf-8")
    except (FileNotFoundError, ModuleNotFoundError):
        return KeywordList(list(DEFAULT_KEYWORDS))
    terms = [t.strip() for t in text.splitlines()]
    terms = [t for t in terms if t and not t.startswith("#")]
    return KeywordList(terms or list(DEFAULT_KEYWORDS))
