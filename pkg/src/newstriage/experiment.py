"""Glue between corpus, features and models: fits a classifier for one of
the supported kinds on labeled posts, scores posts and articles, and
persists fitted models as a versioned JSON container carrying a
feature-space fingerprint.
"""

from __future__ import annotations

import base64
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import Article, Post, PostLabel
from .features.cbow import CbowConfig, EmbeddingMatrix, train_cbow
from .features.ngrams import SparseVector, Vocabulary, build_vocabulary, stack_vectors, vectorize_ngrams
from .features.tokenize import tokenize
from .models import (
    ForestModel,
    KernelSvmModel,
    LinearModel,
    RecurrentModel,
    TreeModel,
    predict_proba_forest,
    predict_proba_linear,
    predict_proba_recurrent,
    predict_proba_svm,
    predict_proba_tree,
    train_forest,
    train_logistic,
    train_recurrent,
    train_svm_smo,
    train_tree,
)

MODEL_FORMAT = "newstriage-model"
MODEL_FORMAT_VERSION = 1

# "constant" always predicts 1.0; it exists for evaluation plumbing tests
TRAINABLE_KINDS = ("lr", "svm", "tree", "forest", "lstm", "constant")


@dataclass
class TrainConfig:
    """Hyperparameters for one training run. Defaults follow the benchmark
    configuration; tests override freely."""

    kind: str = "lr"
    seed: int = 42
    # optimality tolerance for text-scale training; n-gram features carry
    # many near-duplicate columns, so 1e-6 would never be reached
    tol: float = 1e-3
    max_iter: int = 1000
    # n-gram featurization
    min_df: int = 1
    weighting: str = "binary"
    tokenizer_mode: str = "auto"
    # logistic regression (inverse L1 strength)
    c_l1: float = 20.0
    # svm
    c_svm: float = 3000.0
    gamma: float | None = None
    svm_tol: float = 1e-3
    # tree / forest
    tree_depth: int = 30
    forest_depth: int = 15
    n_trees: int = 90
    split_features: int = 300
    bootstrap: bool = True
    # lstm
    hidden_size: int = 200
    batch_size: int = 100
    max_epochs: int = 50
    adam_step: float = 0.002
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    patience: int = 5
    grad_clip: float = 5.0
    cbow: CbowConfig = field(default_factory=CbowConfig)

    def __post_init__(self):
        if self.kind not in TRAINABLE_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")


@dataclass
class ConstantModel:
    probability: float = 1.0


@dataclass
class FittedModel:
    """A trained classifier plus the frozen feature space it was fit on."""

    kind: str
    tokenizer_mode: str
    weighting: str
    model: object
    vocab: Vocabulary | None = None
    embeddings: EmbeddingMatrix | None = None
    config: TrainConfig | None = None

    def score_texts(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros(0)
        if self.kind == "constant":
            return np.full(len(texts), self.model.probability)
        token_seqs = [tokenize(t, self.tokenizer_mode) for t in texts]
        if self.kind == "lstm":
            return np.asarray(predict_proba_recurrent(self.model, self.embeddings, token_seqs), dtype=np.float64)
        vectors = [vectorize_ngrams(seq, self.vocab, self.weighting) for seq in token_seqs]
        if self.kind == "lr":
            return np.asarray(predict_proba_linear(self.model, stack_vectors(vectors)))
        if self.kind == "svm":
            return np.asarray(predict_proba_svm(self.model, stack_vectors(vectors).toarray()))
        dense = np.stack([v.to_dense() for v in vectors])
        if self.kind == "tree":
            return predict_proba_tree(self.model, dense)
        if self.kind == "forest":
            return predict_proba_forest(self.model, dense)
        raise ValueError(f"unknown model kind {self.kind!r}")


def post_text(post: Post) -> str:
    return post.raw_text if post.comment_text is None else post.comment_text


def trainable_posts(posts: list[Post]) -> list[Post]:
    """Labeled posts with usable text; empty-after-cleanup posts are
    excluded from training."""
    return [p for p in posts if p.label is not None and not p.empty_after_preprocess and post_text(p).strip()]


def resolve_tokenizer_mode(texts: list[str], mode: str = "auto") -> str:
    """auto picks whitespace tokenization when at least half of the texts
    contain whitespace, character bigrams otherwise."""
    if mode != "auto":
        return mode
    nonempty = [t for t in texts if t]
    if not nonempty:
        return "whitespace"
    with_space = sum(1 for t in nonempty if any(ch.isspace() for ch in t))
    return "whitespace" if 2 * with_space >= len(nonempty) else "char_bigram"


def train_text_model(train_posts: list[Post], cfg: TrainConfig, dev_posts: list[Post] | None = None) -> FittedModel:
    """Fit cfg.kind on labeled posts. The feature space (vocabulary or
    embeddings) is built from the training posts only; dev posts steer
    early stopping for the lstm kind and are ignored by the rest."""
    usable = trainable_posts(train_posts)
    if cfg.kind == "constant":
        return FittedModel(kind="constant", tokenizer_mode="whitespace", weighting=cfg.weighting, model=ConstantModel(), config=cfg)
    if not usable:
        raise ValueError("no trainable posts (labeled, nonempty comment)")
    texts = [post_text(p) for p in usable]
    labels = np.array([int(p.label) for p in usable], dtype=np.int64)
    mode = resolve_tokenizer_mode(texts, cfg.tokenizer_mode)
    token_seqs = [tokenize(t, mode) for t in texts]

    if cfg.kind == "lstm":
        emb = train_cbow(token_seqs, cfg.cbow)
        pairs = [(seq, int(lab)) for seq, lab in zip(token_seqs, labels)]
        dev_pairs = None
        if dev_posts:
            dev_usable = trainable_posts(dev_posts)
            if dev_usable:
                dev_pairs = [(tokenize(post_text(p), mode), int(p.label)) for p in dev_usable]
        model = train_recurrent(
            pairs,
            emb,
            hidden_size=cfg.hidden_size,
            batch_size=cfg.batch_size,
            max_epochs=cfg.max_epochs,
            step_size=cfg.adam_step,
            beta1=cfg.adam_beta1,
            beta2=cfg.adam_beta2,
            patience=cfg.patience,
            grad_clip=cfg.grad_clip,
            seed=cfg.seed,
            dev=dev_pairs,
        )
        return FittedModel(kind="lstm", tokenizer_mode=mode, weighting=cfg.weighting, model=model, embeddings=emb, config=cfg)

    vocab = build_vocabulary(token_seqs, min_df=cfg.min_df)
    vectors = [vectorize_ngrams(seq, vocab, cfg.weighting) for seq in token_seqs]
    if cfg.kind == "lr":
        model = train_logistic(vectors, labels, c=cfg.c_l1, tol=cfg.tol, max_sweeps=cfg.max_iter)
    elif cfg.kind == "svm":
        model = train_svm_smo(stack_vectors(vectors), labels, c=cfg.c_svm, gamma=cfg.gamma, tol=cfg.svm_tol, seed=cfg.seed)
    elif cfg.kind == "tree":
        dense = np.stack([v.to_dense() for v in vectors])
        model = train_tree(dense, labels, max_depth=cfg.tree_depth)
    elif cfg.kind == "forest":
        dense = np.stack([v.to_dense() for v in vectors])
        model = train_forest(
            dense,
            labels,
            n_trees=cfg.n_trees,
            max_depth=cfg.forest_depth,
            max_features=cfg.split_features,
            bootstrap=cfg.bootstrap,
            seed=cfg.seed,
        )
    else:
        raise ValueError(f"unknown model kind {cfg.kind!r}")
    return FittedModel(kind=cfg.kind, tokenizer_mode=mode, weighting=cfg.weighting, model=model, vocab=vocab, config=cfg)


def score_posts(fitted: FittedModel, posts: list[Post]) -> dict[str, float]:
    """Probability per post id; flagged-empty posts score 0.0 without
    touching the model."""
    out: dict[str, float] = {}
    scorable = []
    for p in posts:
        if p.empty_after_preprocess or not post_text(p).strip():
            out[p.id] = 0.0
        else:
            scorable.append(p)
    if scorable:
        probs = fitted.score_texts([post_text(p) for p in scorable])
        for p, prob in zip(scorable, probs):
            out[p.id] = float(min(max(prob, 0.0), 1.0))
    return out


def score_articles(fitted: FittedModel, posts: list[Post], articles: list[Article]):
    """Score every post, aggregate per article. Returns (post scores,
    scored articles in input article order)."""
    from .pipeline import ScoredPost, score_article

    probs = score_posts(fitted, posts)
    by_id = {p.id: p for p in posts}
    scored_articles = []
    for article in articles:
        scored = [
            ScoredPost(pid, probs[pid], flagged_empty=by_id[pid].empty_after_preprocess)
            for pid in article.post_ids
            if pid in probs
        ]
        if scored:
            scored_articles.append(score_article(article.url, scored))
    return probs, scored_articles


# --- model container io ---


def _encode_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a)
    return {"dtype": str(a.dtype), "shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _decode_array(payload: dict) -> np.ndarray:
    raw = base64.b64decode(payload["data"])
    return np.frombuffer(raw, dtype=payload["dtype"]).reshape(payload["shape"]).copy()


def _tree_to_dict(node) -> dict:
    if node.is_leaf:
        return {"probs": node.probs.tolist()}
    return {
        "probs": node.probs.tolist(),
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
    }


def _tree_from_dict(payload: dict):
    from .models.tree import TreeNode

    node = TreeNode(probs=np.array(payload["probs"]))
    if "feature" in payload:
        node.feature = payload["feature"]
        node.threshold = payload["threshold"]
        node.left = _tree_from_dict(payload["left"])
        node.right = _tree_from_dict(payload["right"])
    return node


def _feature_space_payload(fitted: FittedModel) -> dict:
    if fitted.vocab is not None:
        entries = sorted(fitted.vocab.index, key=fitted.vocab.index.get)
        return {
            "type": "ngram",
            "entries": [[e, fitted.vocab.df[e], fitted.vocab.order[e]] for e in entries],
        }
    if fitted.embeddings is not None:
        emb = fitted.embeddings
        tokens = sorted(emb.index, key=emb.index.get)
        return {
            "type": "embedding",
            "tokens": tokens,
            "unk_index": emb.unk_index,
            "vectors": _encode_array(emb.vectors),
        }
    return {"type": "none"}


def feature_fingerprint(payload: dict) -> str:
    digest = hashlib.sha256(json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8"))
    return digest.hexdigest()[:16]


def _model_payload(fitted: FittedModel) -> dict:
    m = fitted.model
    if isinstance(m, LinearModel):
        return {"weights": _encode_array(m.weights), "bias": m.bias, "c": m.c}
    if isinstance(m, KernelSvmModel):
        return {
            "support_vectors": _encode_array(m.support_vectors),
            "dual_coef": _encode_array(m.dual_coef),
            "bias": m.bias,
            "gamma": m.gamma,
            "c": m.c,
            "platt_a": m.platt_a,
            "platt_b": m.platt_b,
        }
    if isinstance(m, TreeModel):
        return {"root": _tree_to_dict(m.root), "max_depth": m.max_depth, "n_features": m.n_features}
    if isinstance(m, ForestModel):
        return {
            "trees": [{"root": _tree_to_dict(t.root), "max_depth": t.max_depth, "n_features": t.n_features} for t in m.trees],
            "seed": m.seed,
            "n_features": m.n_features,
        }
    if isinstance(m, RecurrentModel):
        return {name: _encode_array(arr) for name, arr in m.params().items()} | {"max_len": m.max_len}
    if isinstance(m, ConstantModel):
        return {"probability": m.probability}
    raise TypeError(f"cannot serialize model of type {type(m).__name__}")


def save_fitted(fitted: FittedModel, path) -> None:
    feature_space = _feature_space_payload(fitted)
    container = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "kind": fitted.kind,
        "tokenizer_mode": fitted.tokenizer_mode,
        "weighting": fitted.weighting,
        "feature_fingerprint": feature_fingerprint(feature_space),
        "feature_space": feature_space,
        "parameters": _model_payload(fitted),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(container, fh, ensure_ascii=False)


def load_fitted(path) -> FittedModel:
    with open(path, encoding="utf-8") as fh:
        container = json.load(fh)
    if container.get("format") != MODEL_FORMAT or container.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError("not a recognized model container")
    feature_space = container["feature_space"]
    if feature_fingerprint(feature_space) != container["feature_fingerprint"]:
        raise ValueError("feature-space fingerprint mismatch; the model file does not match its feature space")

    vocab = None
    embeddings = None
    if feature_space["type"] == "ngram":
        index, df, order = {}, {}, {}
        for i, (entry, entry_df, entry_order) in enumerate(feature_space["entries"]):
            index[entry], df[entry], order[entry] = i, entry_df, entry_order
        vocab = Vocabulary(index=index, df=df, order=order)
    elif feature_space["type"] == "embedding":
        vectors = _decode_array(feature_space["vectors"])
        index = {tok: i for i, tok in enumerate(feature_space["tokens"])}
        embeddings = EmbeddingMatrix(vectors=vectors, index=index, unk_index=feature_space["unk_index"])

    kind = container["kind"]
    params = container["parameters"]
    if kind == "lr":
        model = LinearModel(weights=_decode_array(params["weights"]), bias=params["bias"], c=params["c"])
    elif kind == "svm":
        model = KernelSvmModel(
            support_vectors=_decode_array(params["support_vectors"]),
            dual_coef=_decode_array(params["dual_coef"]),
            bias=params["bias"],
            gamma=params["gamma"],
            c=params["c"],
            platt_a=params["platt_a"],
            platt_b=params["platt_b"],
        )
    elif kind == "tree":
        model = TreeModel(root=_tree_from_dict(params["root"]), max_depth=params["max_depth"], n_features=params["n_features"])
    elif kind == "forest":
        model = ForestModel(
            trees=[
                TreeModel(root=_tree_from_dict(t["root"]), max_depth=t["max_depth"], n_features=t["n_features"])
                for t in params["trees"]
            ],
            seed=params["seed"],
            n_features=params["n_features"],
        )
    elif kind == "lstm":
        model = RecurrentModel(
            wx=_decode_array(params["wx"]),
            wh=_decode_array(params["wh"]),
            b=_decode_array(params["b"]),
            w_out=_decode_array(params["w_out"]),
            b_out=_decode_array(params["b_out"]),
            max_len=params["max_len"],
        )
    elif kind == "constant":
        model = ConstantModel(probability=params["probability"])
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return FittedModel(
        kind=kind,
        tokenizer_mode=container["tokenizer_mode"],
        weighting=container["weighting"],
        model=model,
        vocab=vocab,
        embeddings=embeddings,
    )
