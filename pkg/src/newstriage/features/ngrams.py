"""Unigram+bigram vocabulary and sparse bag-of-ngrams vectors."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

BIGRAM_JOIN = "_"


@dataclass
class Vocabulary:
    """Frozen n-gram vocabulary: entry -> contiguous index, plus document
    frequency and n-gram order per entry. Unknown entries map to nothing."""

    index: dict[str, int]
    df: dict[str, int]
    order: dict[str, int]

    def __len__(self) -> int:
        return len(self.index)


@dataclass
class SparseVector:
    """Sorted (index, value) pairs over a fixed dimension; zeros are never
    stored."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.indices.size:
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")
            if self.indices[0] < 0 or self.indices[-1] >= self.dim:
                raise ValueError("index out of range")
            if np.any(self.values == 0.0):
                raise ValueError("zero values must not be stored")

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        dense[self.indices] = self.values
        return dense


def _doc_grams(tokens: list[str]) -> tuple[set[str], set[str]]:
    unigrams = set(tokens)
    bigrams = {f"{a}{BIGRAM_JOIN}{b}" for a, b in zip(tokens, tokens[1:])}
    return unigrams, bigrams


def build_vocabulary(corpus: list[list[str]], min_df: int = 1) -> Vocabulary:
    """All unigrams and adjacent bigrams with document frequency >= min_df,
    indexed lexicographically. Invariant under document reordering."""
    if not corpus:
        raise ValueError("corpus is empty")
    df: Counter[str] = Counter()
    seen_as_unigram: set[str] = set()
    for tokens in corpus:
        unigrams, bigrams = _doc_grams(tokens)
        seen_as_unigram |= unigrams
        df.update(unigrams | bigrams)
    kept = sorted(g for g, c in df.items() if c >= min_df)
    return Vocabulary(
        index={g: i for i, g in enumerate(kept)},
        df={g: df[g] for g in kept},
        order={g: 1 if g in seen_as_unigram else 2 for g in kept},
    )


def vectorize_ngrams(tokens: list[str], vocab: Vocabulary, weighting: str = "binary") -> SparseVector:
    if weighting not in ("binary", "count"):
        raise ValueError(f"unknown weighting {weighting!r}")
    counts: Counter[str] = Counter(tokens)
    counts.update(f"{a}{BIGRAM_JOIN}{b}" for a, b in zip(tokens, tokens[1:]))
    hits: dict[int, float] = {}
    for gram, count in counts.items():
        j = vocab.index.get(gram)
        if j is not None:
            hits[j] = 1.0 if weighting == "binary" else float(count)
    idx = sorted(hits)
    return SparseVector(
        indices=np.array(idx, dtype=np.int64),
        values=np.array([hits[j] for j in idx], dtype=np.float64),
        dim=len(vocab),
    )


def stack_vectors(vectors: list[SparseVector]) -> sp.csr_matrix:
    """Stack SparseVectors into one CSR matrix (rows in given order)."""
    if not vectors:
        raise ValueError("no vectors to stack")
    dim = vectors[0].dim
    if any(v.dim != dim for v in vectors):
        raise ValueError("inconsistent vector dimensions")
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        indptr[i + 1] = indptr[i] + v.indices.size
    indices = np.concatenate([v.indices for v in vectors]) if indptr[-1] else np.zeros(0, np.int64)
    data = np.concatenate([v.values for v in vectors]) if indptr[-1] else np.zeros(0)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


def save_vocabulary(vocab: Vocabulary, path) -> None:
    entries = sorted(vocab.index, key=vocab.index.get)
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            rec = {"entry": entry, "index": vocab.index[entry], "df": vocab.df[entry], "order": vocab.order[entry]}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_vocabulary(path) -> Vocabulary:
    index: dict[str, int] = {}
    df: dict[str, int] = {}
    order: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            index[rec["entry"]] = rec["index"]
            df[rec["entry"]] = rec["df"]
            order[rec["entry"]] = rec["order"]
    return Vocabulary(index=index, df=df, order=order)
