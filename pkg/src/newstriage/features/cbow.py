"""CBOW word-embedding trainer with negative sampling.

Single-threaded SGD, deterministic given the seed. Tokens rarer than
min_count are pooled into a trained unk row so downstream sequence models
always have a vector for every position.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

UNK_TOKEN = "<unk>"


@dataclass
class CbowConfig:
    embedding_size: int = 300
    window: int = 7
    min_count: int = 20
    subsample: float = 1e-5
    negatives: int = 5
    epochs: int = 5
    seed: int = 42
    # linear decay over all scheduled training tokens
    lr_initial: float = 0.025
    lr_final: float = 1e-4

    def __post_init__(self):
        if self.embedding_size <= 0 or self.window <= 0 or self.min_count <= 0 or self.negatives <= 0:
            raise ValueError("embedding_size, window, min_count and negatives must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 0.0 < self.subsample < 1.0:
            raise ValueError("subsample must lie in (0, 1)")


@dataclass
class EmbeddingMatrix:
    """vocab_size x d matrix with its token -> row mapping."""

    vectors: np.ndarray
    index: dict[str, int]
    unk_index: int | None = None
    training_loss: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[1] <= 0:
            raise ValueError("vectors must be a vocab_size x d matrix with d > 0")
        if self.vectors.shape[0] != len(self.index):
            raise ValueError("row count must equal vocabulary size")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def row(self, token: str) -> int | None:
        j = self.index.get(token)
        return self.unk_index if j is None else j


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def pair_loss(w_in, w_out, context_ids, center_id, negative_ids) -> float:
    """Negative-sampling objective for one (context window, center) pair."""
    h = w_in[context_ids].mean(axis=0)
    pos = _log_sigmoid(h @ w_out[center_id])
    neg = _log_sigmoid(-(w_out[negative_ids] @ h)).sum()
    return float(-(pos + neg))


def pair_gradients(w_in, w_out, context_ids, center_id, negative_ids):
    """Gradients of :func:`pair_loss`.

    Returns (grad per context row, grad for the center output row, grads
    for the negative output rows). Every context row shares the same
    gradient because the hidden state is their mean.
    """
    h = w_in[context_ids].mean(axis=0)
    e_pos = _sigmoid(h @ w_out[center_id]) - 1.0
    e_neg = _sigmoid(w_out[negative_ids] @ h)
    grad_center = e_pos * h
    grad_negatives = e_neg[:, None] * h[None, :]
    dh = e_pos * w_out[center_id] + e_neg @ w_out[negative_ids]
    grad_context = dh / len(context_ids)
    return grad_context, grad_center, grad_negatives


def train_cbow(corpus: list[list[str]], cfg: CbowConfig) -> EmbeddingMatrix:
    """Train input embeddings on tokenized sentences.

    Context is a fixed window of cfg.window tokens each side of the center
    (after frequent-word subsampling); negatives are drawn from the
    unigram^0.75 distribution. epochs=0 returns the seeded initialization
    untouched.
    """
    counts = Counter(t for sent in corpus for t in sent)
    total_tokens = sum(counts.values())
    if total_tokens == 0:
        raise ValueError("corpus has no tokens")
    kept = {t: c for t, c in counts.items() if c >= cfg.min_count}
    if not kept:
        raise ValueError("effective vocabulary is empty; lower min_count")
    rare_total = total_tokens - sum(kept.values())

    tokens = [UNK_TOKEN] + [t for t, _ in sorted(kept.items(), key=lambda kv: (-kv[1], kv[0]))]
    index = {t: i for i, t in enumerate(tokens)}
    freq = np.array([max(rare_total, 1)] + [kept[t] for t in tokens[1:]], dtype=np.float64)

    rng = np.random.default_rng(cfg.seed)
    vocab_size, dim = len(tokens), cfg.embedding_size
    w_in = (rng.random((vocab_size, dim)) - 0.5) / dim
    w_out = np.zeros((vocab_size, dim))
    emb = EmbeddingMatrix(vectors=w_in, index=index, unk_index=0)
    if cfg.epochs == 0:
        return emb

    rel = freq / total_tokens
    keep_prob = np.minimum(1.0, np.sqrt(cfg.subsample / rel))
    noise = freq**0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    ids_corpus = [np.array([index.get(t, 0) for t in sent], dtype=np.int64) for sent in corpus]
    scheduled = cfg.epochs * total_tokens
    processed = 0
    window = cfg.window

    for _ in range(cfg.epochs):
        epoch_loss = 0.0
        epoch_pairs = 0
        for sent_ids in ids_corpus:
            lr = max(cfg.lr_final, cfg.lr_initial * (1.0 - processed / scheduled))
            processed += sent_ids.size
            sent = sent_ids[rng.random(sent_ids.size) < keep_prob[sent_ids]]
            for pos in range(sent.size):
                center = sent[pos]
                ctx = np.concatenate((sent[max(0, pos - window) : pos], sent[pos + 1 : pos + 1 + window]))
                if ctx.size == 0:
                    continue
                negs = np.searchsorted(noise_cdf, rng.random(cfg.negatives))
                negs = negs[negs != center]
                h = w_in[ctx].mean(axis=0)
                e_pos = _sigmoid(h @ w_out[center]) - 1.0
                e_neg = _sigmoid(w_out[negs] @ h) if negs.size else np.zeros(0)
                epoch_loss -= math.log(max(1.0 + e_pos, 1e-12))
                if negs.size:
                    epoch_loss -= np.log(np.maximum(1.0 - e_neg, 1e-12)).sum()
                epoch_pairs += 1
                dh = e_pos * w_out[center] + (e_neg @ w_out[negs] if negs.size else 0.0)
                w_out[center] -= lr * e_pos * h
                if negs.size:
                    np.add.at(w_out, negs, -lr * e_neg[:, None] * h[None, :])
                np.add.at(w_in, ctx, -lr * dh / ctx.size)
        emb.training_loss.append(float(epoch_loss) / max(epoch_pairs, 1))
    return emb


def embed_sequence(tokens: list[str], emb: EmbeddingMatrix) -> np.ndarray:
    """Rows for each token; out-of-vocabulary tokens use the unk row, or
    are dropped when the matrix has none. Raises when that drops every
    token of a nonempty sequence."""
    rows = []
    for token in tokens:
        j = emb.row(token)
        if j is not None:
            rows.append(j)
    if tokens and not rows:
        raise ValueError("all tokens are out of vocabulary and no unk row is configured")
    if not rows:
        return np.zeros((0, emb.dim))
    return emb.vectors[np.array(rows, dtype=np.int64)]


def save_embeddings(emb: EmbeddingMatrix, path) -> None:
    """Text dump: header "vocab_size d", then one "token v_1 ... v_d" line
    per row (common embedding interchange format)."""
    tokens = sorted(emb.index, key=emb.index.get)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(tokens)} {emb.dim}\n")
        for token in tokens:
            vec = " ".join(repr(float(v)) for v in emb.vectors[emb.index[token]])
            fh.write(f"{token} {vec}\n")


def load_embeddings(path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError("embedding file must start with 'vocab_size d'")
        vocab_size, dim = int(header[0]), int(header[1])
        vectors = np.empty((vocab_size, dim))
        index: dict[str, int] = {}
        for i in range(vocab_size):
            parts = fh.readline().rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise ValueError(f"embedding row {i} has {len(parts) - 1} values, expected {dim}")
            index[parts[0]] = i
            vectors[i] = [float(v) for v in parts[1:]]
    return EmbeddingMatrix(vectors=vectors, index=index, unk_index=index.get(UNK_TOKEN))
