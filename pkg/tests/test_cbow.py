import numpy as np
import pytest

from newstriage.features.cbow import (
    UNK_TOKEN,
    CbowConfig,
    EmbeddingMatrix,
    embed_sequence,
    load_embeddings,
    pair_gradients,
    pair_loss,
    save_embeddings,
    train_cbow,
)


def tiny_cfg(**overrides):
    base = dict(embedding_size=12, window=2, min_count=1, subsample=0.5, negatives=3, epochs=3, seed=5)
    base.update(overrides)
    return CbowConfig(**base)


def toy_corpus(n_sentences=2000, seed=0):
    """Two synonym families appearing in interchangeable contexts."""
    rng = np.random.default_rng(seed)
    sentences = []
    for _ in range(n_sentences):
        animal = str(rng.choice(["cat", "feline"]))
        vehicle = str(rng.choice(["car", "auto"]))
        if rng.random() < 0.5:
            sentences.append(["the", animal, "sat", "on", "the", "mat"])
        else:
            sentences.append(["the", vehicle, "drove", "down", "the", "road"])
    return sentences


def cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


def test_pair_gradients_match_finite_differences():
    rng = np.random.default_rng(1)
    V, d = 9, 6
    w_in = rng.normal(scale=0.3, size=(V, d))
    w_out = rng.normal(scale=0.3, size=(V, d))
    ctx = np.array([1, 4, 7])
    center = 2
    negs = np.array([3, 5, 8])

    g_ctx, g_center, g_negs = pair_gradients(w_in, w_out, ctx, center, negs)
    eps = 1e-6

    def fd(matrix, row, col):
        orig = matrix[row, col]
        matrix[row, col] = orig + eps
        up = pair_loss(w_in, w_out, ctx, center, negs)
        matrix[row, col] = orig - eps
        down = pair_loss(w_in, w_out, ctx, center, negs)
        matrix[row, col] = orig
        return (up - down) / (2 * eps)

    worst = 0.0
    for row in ctx:
        for col in range(d):
            num = fd(w_in, row, col)
            worst = max(worst, abs(num - g_ctx[col]) / max(abs(num), 1e-8))
    for col in range(d):
        num = fd(w_out, center, col)
        worst = max(worst, abs(num - g_center[col]) / max(abs(num), 1e-8))
    for i, row in enumerate(negs):
        for col in range(d):
            num = fd(w_out, row, col)
            worst = max(worst, abs(num - g_negs[i, col]) / max(abs(num), 1e-8))
    assert worst < 1e-4


def test_zero_epochs_returns_initialization():
    corpus = [["a", "b", "c"]] * 5
    emb0 = train_cbow(corpus, tiny_cfg(epochs=0))
    emb0_again = train_cbow(corpus, tiny_cfg(epochs=0))
    assert np.array_equal(emb0.vectors, emb0_again.vectors)
    trained = train_cbow(corpus, tiny_cfg(epochs=2))
    assert not np.array_equal(emb0.vectors, trained.vectors)


def test_synonyms_cluster_together():
    emb = train_cbow(toy_corpus(), tiny_cfg(embedding_size=24, window=3, min_count=5, epochs=6, negatives=5))
    vec = lambda t: emb.vectors[emb.index[t]]
    assert cosine(vec("cat"), vec("feline")) > cosine(vec("cat"), vec("car"))
    assert cosine(vec("car"), vec("auto")) > cosine(vec("car"), vec("feline"))


def test_epoch_loss_non_increasing_within_noise():
    emb = train_cbow(toy_corpus(n_sentences=800), tiny_cfg(embedding_size=16, epochs=5))
    losses = emb.training_loss
    assert len(losses) == 5
    for prev, cur in zip(losses, losses[1:]):
        assert cur <= prev * 1.05
    assert losses[-1] < losses[0]


def test_empty_effective_vocabulary_errors():
    with pytest.raises(ValueError):
        train_cbow([["a"], ["b"]], tiny_cfg(min_count=10))
    with pytest.raises(ValueError):
        train_cbow([], tiny_cfg())


def test_unknown_tokens_share_trained_unk_row():
    corpus = [["a", "b", "a", "b", "rare1"], ["a", "b", "a", "rare2"]] * 10
    emb = train_cbow(corpus, tiny_cfg(min_count=15, epochs=1))
    assert UNK_TOKEN in emb.index
    assert emb.row("rare1") == emb.row("never-seen") == emb.unk_index


# --- embed_sequence ---


def test_embed_exact_rows_and_unk_substitution():
    vectors = np.arange(12.0).reshape(4, 3)
    emb = EmbeddingMatrix(vectors=vectors, index={"<unk>": 0, "a": 1, "b": 2, "c": 3}, unk_index=0)
    out = embed_sequence(["b", "zzz", "a"], emb)
    # lookup oracle with unk substitution
    expect = np.stack([vectors[2], vectors[0], vectors[1]])
    assert np.array_equal(out, expect)


def test_embed_empty_sequence():
    emb = EmbeddingMatrix(vectors=np.zeros((1, 4)), index={"a": 0})
    assert embed_sequence([], emb).shape == (0, 4)


def test_embed_all_oov_without_unk_errors():
    emb = EmbeddingMatrix(vectors=np.ones((1, 2)), index={"a": 0}, unk_index=None)
    with pytest.raises(ValueError):
        embed_sequence(["x", "y"], emb)
    # partial oov just drops the unknown token
    assert embed_sequence(["a", "x"], emb).shape == (1, 2)


def test_embedded_length_never_exceeds_token_count():
    from newstriage.features.tokenize import tokenize

    emb = EmbeddingMatrix(vectors=np.ones((2, 3)), index={"a": 0, "b": 1}, unk_index=None)
    rng = np.random.default_rng(14)
    alphabet = list("ab xy")
    for _ in range(50):
        text = "".join(rng.choice(alphabet, size=int(rng.integers(1, 20))))
        tokens = tokenize(text)
        if tokens and all(t not in emb.index for t in tokens):
            continue
        assert embed_sequence(tokens, emb).shape[0] <= len(tokens)


def test_embedding_file_round_trip(tmp_path):
    emb = train_cbow([["a", "b", "c", "a", "b"]] * 4, tiny_cfg(epochs=1))
    path = tmp_path / "emb.txt"
    save_embeddings(emb, path)
    loaded = load_embeddings(path)
    assert loaded.index == emb.index
    assert loaded.unk_index == emb.unk_index
    assert np.allclose(loaded.vectors, emb.vectors, rtol=0, atol=0)
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == f"{len(emb.index)} {emb.dim}"


def test_embedding_matrix_invariants():
    with pytest.raises(ValueError):
        EmbeddingMatrix(vectors=np.zeros((2, 3)), index={"a": 0})
