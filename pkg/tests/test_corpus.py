import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newstriage.corpus import (
    Article,
    ArticleLabel,
    DatasetError,
    FoldAssignment,
    InsufficientClassSizeError,
    KeywordList,
    Post,
    PostLabel,
    UnlabeledPostError,
    default_keywords,
    derive_article_label,
    filter_candidates,
    group_posts_by_article,
    load_dataset,
    load_keywords,
    normalize_url,
    keyword_spans,
    preprocess,
    save_dataset,
    stratified_folds,
)


def post(i, text, url="https://ex.com/a", label=None):
    return Post(id=str(i), article_url=url, raw_text=text, label=label)


# --- filter_candidates ---


def scan_contains(text: str, needle: str) -> bool:
    """Independent substring scan: explicit character windows, no `in`."""
    n, m = len(text), len(needle)
    for start in range(n - m + 1):
        if all(text[start + j] == needle[j] for j in range(m)):
            return True
    return False


def test_filter_keeps_keyword_hits():
    p1 = post(1, "この記事は誤報では？千代田区も路上喫煙はダメで過料が科されているはずです！")
    p2 = post(2, "いい天気")
    assert filter_candidates([p1, p2], KeywordList(["誤報"])) == [p1]


def test_filter_no_hits_gives_empty():
    posts = [post(i, f"plain text {i}") for i in range(5)]
    assert filter_candidates(posts, KeywordList(["誤報"])) == []
    assert filter_candidates([], KeywordList(["誤報"])) == []


def test_filter_matches_substring_scan_oracle():
    rng = np.random.default_rng(3)
    keyword = "誤報"
    posts = []
    for i in range(50):
        body = "".join(rng.choice(list("あいうえおかきくけこ"), size=12))
        if i % 5 == 0:
            cut = int(rng.integers(0, len(body)))
            body = body[:cut] + keyword + body[cut:]
        posts.append(post(i, body))
    expected = [p for p in posts if scan_contains(p.raw_text, keyword)]
    assert len(expected) == 10
    assert filter_candidates(posts, KeywordList([keyword])) == expected


def test_filter_casefolds_latin_keywords_only():
    p1 = post(1, "this is MISINFORMATION here")
    p2 = post(2, "ごほう is not the same as 誤報")
    assert filter_candidates([p1], KeywordList(["misinformation"])) == [p1]
    # kana/kanji keywords match exactly
    assert filter_candidates([p2], KeywordList(["誤報"])) == [p2]


def test_filter_is_idempotent_and_subset():
    posts = [post(i, t) for i, t in enumerate(["誤報だ", "ほんと", "また誤報", "天気"])]
    kw = KeywordList(["誤報"])
    once = filter_candidates(posts, kw)
    assert filter_candidates(once, kw) == once
    assert all(p in posts for p in once)


def test_keyword_list_invariants():
    with pytest.raises(ValueError):
        KeywordList([])
    with pytest.raises(ValueError):
        KeywordList(["a", "a"])
    with pytest.raises(ValueError):
        KeywordList(["a", ""])


def test_keyword_spans_offsets():
    spans = keyword_spans("記事だが誤報かも", KeywordList(["誤報"]))
    assert spans == [(4, 6, "誤報")]
    spans = keyword_spans("Fake FAKE fake", KeywordList(["fake"]))
    assert [(s, e) for s, e, _ in spans] == [(0, 4), (5, 9), (10, 14)]


# --- preprocess ---


def oracle_clean(raw: str, title: str | None) -> str:
    """Character-scanner oracle: removes the title by find/splice, walks
    characters to build tokens, then filters noise tokens."""
    text = raw
    if title:
        out = []
        i = 0
        while i < len(text):
            if text[i : i + len(title)] == title:
                i += len(title)
            else:
                out.append(text[i])
                i += 1
        text = "".join(out)
    tokens, buf = [], []
    for ch in text + " ":
        if ch.isspace():
            if buf:
                tokens.append("".join(buf))
                buf = []
        else:
            buf.append(ch)
    kept = [
        t
        for t in tokens
        if not (t.startswith("http://") or t.startswith("https://") or t[0] in "#＃@＠")
    ]
    return " ".join(kept)


def test_preprocess_removes_noise_tokens():
    p = preprocess(post(1, "すごい記事 https://ex.com/a #news @bob"))
    assert p.comment_text == "すごい記事"
    assert p.raw_text == "すごい記事 https://ex.com/a #news @bob"


def test_preprocess_removes_repeated_title():
    p = preprocess(post(1, "TitleX TitleX body"), article_title="TitleX")
    assert p.comment_text == "body"


def test_preprocess_flags_empty_result():
    p = preprocess(post(1, "#only #tags https://x.y"))
    assert p.empty_after_preprocess and p.comment_text == ""


def test_preprocess_requires_raw_text():
    with pytest.raises(ValueError):
        preprocess(post(1, ""))


def test_preprocess_matches_scanner_oracle():
    rng = np.random.default_rng(9)
    words = ["記事", "ニュース", "ほんと", "うそ", "read", "this"]
    noise = ["https://ex.com/x?q=1", "http://t.co/abc", "#tag", "＃タグ", "@alice", "＠ぼぶ"]
    title = "今日の見出し"
    for _ in range(100):
        parts = [str(w) for w in rng.choice(words, size=int(rng.integers(1, 6)))]
        for item in rng.choice(noise, size=int(rng.integers(0, 4))):
            parts.insert(int(rng.integers(0, len(parts) + 1)), str(item))
        if rng.random() < 0.5:
            parts.insert(int(rng.integers(0, len(parts) + 1)), title)
        raw = " ".join(parts)
        use_title = title if rng.random() < 0.7 else None
        got = preprocess(post(1, raw), article_title=use_title)
        assert got.comment_text == oracle_clean(raw, use_title)


@given(st.text(min_size=1, max_size=80))
@settings(max_examples=60, deadline=None)
def test_preprocess_idempotent_on_own_output(raw):
    first = preprocess(post(1, raw))
    if first.comment_text == "":
        return
    again = preprocess(post(2, first.comment_text))
    assert again.comment_text == first.comment_text


# --- derive_article_label ---


def test_derive_label_any_scp_wins():
    posts = [
        post(1, "a", label=PostLabel.NOT_SCP),
        post(2, "b", label=PostLabel.SCP),
        post(3, "c", label=PostLabel.NOT_SCP),
    ]
    article = Article(url="u", post_ids=["1", "2", "3"])
    assert derive_article_label(article, posts) == ArticleLabel.SUSPICIOUS


def test_derive_label_all_negative():
    posts = [post(1, "a", label=PostLabel.NOT_SCP), post(2, "b", label=PostLabel.NOT_SCP)]
    assert derive_article_label(Article(url="u", post_ids=["1", "2"]), posts) == ArticleLabel.NOT_SUSPICIOUS


def test_derive_label_unlabeled_post_errors():
    posts = [post(1, "a", label=PostLabel.SCP), post(2, "b")]
    with pytest.raises(UnlabeledPostError):
        derive_article_label(Article(url="u", post_ids=["1", "2"]), posts)


def test_derive_label_matches_any_oracle():
    rng = np.random.default_rng(21)
    for _ in range(200):
        labels = rng.integers(0, 2, size=int(rng.integers(1, 8)))
        posts = [post(i, "t", label=PostLabel(int(l))) for i, l in enumerate(labels)]
        article = Article(url="u", post_ids=[p.id for p in posts])
        expect = ArticleLabel.SUSPICIOUS if any(labels == 1) else ArticleLabel.NOT_SUSPICIOUS
        assert derive_article_label(article, posts) == expect


def test_derive_label_monotone_in_scp():
    posts = [post(1, "a", label=PostLabel.NOT_SCP), post(2, "b", label=PostLabel.NOT_SCP)]
    article = Article(url="u", post_ids=["1", "2"])
    before = derive_article_label(article, posts)
    posts.append(post(3, "c", label=PostLabel.SCP))
    article.post_ids.append("3")
    after = derive_article_label(article, posts)
    assert not (before == ArticleLabel.SUSPICIOUS and after == ArticleLabel.NOT_SUSPICIOUS)
    assert after == ArticleLabel.SUSPICIOUS


# --- group_posts_by_article ---


def test_group_partitions_posts():
    posts = [post(i, "t", url=u) for i, u in enumerate(["A", "A", "B", "A", "B"])]
    articles = group_posts_by_article(posts)
    assert [len(a.post_ids) for a in articles] == [3, 2]
    assert sum(len(a.post_ids) for a in articles) == len(posts)


def test_group_dataset_scale_average():
    # 1,836 articles averaging 2.75 posts each -> 5,049 posts
    rng = np.random.default_rng(0)
    n_articles, n_posts = 1836, 5049
    assignment = np.concatenate([np.arange(n_articles), rng.integers(0, n_articles, n_posts - n_articles)])
    posts = [post(i, "t", url=f"u{a}") for i, a in enumerate(assignment)]
    articles = group_posts_by_article(posts)
    assert len(articles) == n_articles
    assert sum(len(a.post_ids) for a in articles) == n_posts
    assert abs(n_posts / n_articles - 2.75) < 1e-9


def test_group_matches_hashmap_oracle():
    rng = np.random.default_rng(4)
    posts = [post(i, "t", url=f"https://Site{int(rng.integers(0, 37))}.com/p") for i in range(500)]
    oracle: dict[str, list[str]] = {}
    for p in posts:
        oracle.setdefault(normalize_url(p.article_url), []).append(p.id)
    got = {a.url: a.post_ids for a in group_posts_by_article(posts)}
    assert got == oracle
    ids = [pid for a in group_posts_by_article(posts) for pid in a.post_ids]
    assert len(ids) == len(set(ids)) == len(posts)


def test_normalize_url_rules():
    assert normalize_url("HTTP://EXample.com/Path?q=1#frag") == "http://example.com/Path?q=1"
    assert normalize_url("not a url") == "not a url"


# --- stratified_folds ---


def test_folds_divisible_case():
    labels = [1] * 10 + [0] * 10
    folds = stratified_folds(labels, 5, seed=0)
    for f in range(5):
        idx = folds.test_indices(f)
        assert sum(labels[i] for i in idx) == 2 and len(idx) == 4


def test_folds_benchmark_counts():
    labels = np.array([1] * 1036 + [0] * 6739)
    folds = stratified_folds(labels, 5, seed=1)
    per_fold_pos = [int(labels[folds.test_indices(f)].sum()) for f in range(5)]
    assert sorted(set(per_fold_pos)) in ([207, 208], [207], [208])
    assert sum(per_fold_pos) == 1036
    for f in range(5):
        assert per_fold_pos[f] in (207, 208)


def test_folds_match_counting_oracle():
    rng = np.random.default_rng(8)
    for trial in range(100):
        k = int(rng.integers(2, 6))
        n_pos = int(rng.integers(k, 40))
        n_neg = int(rng.integers(k, 60))
        labels = np.array([1] * n_pos + [0] * n_neg)
        rng.shuffle(labels)
        folds = stratified_folds(labels, k, seed=trial)
        counts = np.zeros(labels.size, dtype=int)
        for f in range(k):
            counts[folds.test_indices(f)] += 1
        assert np.all(counts == 1)  # everyone assigned exactly once
        for f in range(k):
            for cls, total in ((1, n_pos), (0, n_neg)):
                got = int(np.sum(labels[folds.test_indices(f)] == cls))
                assert abs(got - total / k) <= 1


def test_folds_deterministic():
    labels = [1] * 9 + [0] * 23
    a = stratified_folds(labels, 4, seed=7)
    b = stratified_folds(labels, 4, seed=7)
    assert np.array_equal(a.assignments, b.assignments)


def test_folds_insufficient_class():
    with pytest.raises(InsufficientClassSizeError):
        stratified_folds([1, 0, 0, 0, 0, 0], 2, seed=0)
    with pytest.raises(ValueError):
        stratified_folds([1, 0, 1, 0], 1, seed=0)


# --- dataset io ---


def test_load_empty_file(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text("")
    assert load_dataset(path) == ([], [])


def test_minus_one_label_maps_to_not_scp(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"type":"post","id":"1","url":"u","raw":"t","label":-1}\n')
    posts, _ = load_dataset(path)
    assert posts[0].label == PostLabel.NOT_SCP


def test_zero_label_accepted_as_negative(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"type":"post","id":"1","url":"u","raw":"t","label":0}\n')
    posts, _ = load_dataset(path)
    assert posts[0].label == PostLabel.NOT_SCP


def test_unknown_label_rejected(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"type":"post","id":"1","url":"u","raw":"t","label":2}\n')
    with pytest.raises(DatasetError):
        load_dataset(path)


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "d.jsonl"
    path.write_text('{"type":"post","id":"1","url":"u","raw":"t","label":1}\n{oops\n')
    with pytest.raises(DatasetError, match="line 2"):
        load_dataset(path)


def test_duplicate_post_id_rejected(tmp_path):
    path = tmp_path / "d.jsonl"
    rec = '{"type":"post","id":"1","url":"u","raw":"t","label":1}\n'
    path.write_text(rec + rec)
    with pytest.raises(DatasetError, match="duplicate"):
        load_dataset(path)


def test_round_trip_byte_identical(tmp_path):
    rng = np.random.default_rng(12)
    posts = []
    for i in range(1000):
        label = [None, PostLabel.SCP, PostLabel.NOT_SCP][int(rng.integers(0, 3))]
        comment = None if rng.random() < 0.3 else f"コメント{i}"
        posts.append(
            Post(
                id=f"p{i}",
                article_url=f"https://ex.com/{int(rng.integers(0, 100))}",
                raw_text=f"本文 {i} #tag",
                comment_text=comment,
                label=label,
                source_meta={"ts": int(rng.integers(0, 10**9))} if rng.random() < 0.2 else None,
            )
        )
    articles = group_posts_by_article(posts)
    first = tmp_path / "a.jsonl"
    second = tmp_path / "b.jsonl"
    save_dataset(first, posts, articles)
    loaded = load_dataset(first)
    save_dataset(second, *loaded)
    assert first.read_bytes() == second.read_bytes()
    reloaded = load_dataset(second)
    assert reloaded == loaded


def test_keyword_file_parsing(tmp_path):
    path = tmp_path / "kw.txt"
    path.write_text("# comment line\n誤報\n\nuntrue\n誤報\n", encoding="utf-8")
    kw = load_keywords(path)
    assert kw.terms == ["誤報", "untrue"]
    assert len(default_keywords().terms) >= 3
