import numpy as np
import pytest

from newstriage.features.cbow import CbowConfig, EmbeddingMatrix, train_cbow
from newstriage.models.lstm import (
    assemble_batch,
    batch_loss,
    forward,
    init_recurrent,
    loss_and_grads,
    predict_proba_recurrent,
    train_recurrent,
)


def tiny_model(input_size=5, hidden=4, seed=0):
    return init_recurrent(input_size, hidden_size=hidden, seed=seed)


def tiny_batch(seed=1, batch=2, T=4, dim=5):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(batch, T, dim))
    mask = np.ones((batch, T))
    mask[1, T - 1] = 0.0  # one padded step exercises the carry-through path
    y = rng.integers(0, 2, size=batch)
    return X, mask, y


def test_gradients_match_finite_differences():
    model = tiny_model()
    X, mask, y = tiny_batch()
    _, grads = loss_and_grads(model, X, mask, y)
    eps = 1e-6
    for name, param in model.params().items():
        numeric = np.zeros_like(param)
        flat = param.reshape(-1)
        num_flat = numeric.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + eps
            up = batch_loss(model, X, mask, y)
            flat[idx] = orig - eps
            down = batch_loss(model, X, mask, y)
            flat[idx] = orig
            num_flat[idx] = (up - down) / (2 * eps)
        denom = max(np.linalg.norm(numeric), 1e-10)
        rel = np.linalg.norm(grads[name] - numeric) / denom
        assert rel < 1e-3, f"{name}: rel err {rel:.2e}"


def test_zero_output_weights_give_half():
    model = tiny_model()
    model.w_out[...] = 0.0
    model.b_out[...] = 0.0
    X, mask, _ = tiny_batch(seed=3)
    probs, _ = forward(model, X, mask)
    assert np.allclose(probs, 0.5)


def test_softmax_rows_sum_to_one():
    model = tiny_model(seed=5)
    X, mask, _ = tiny_batch(seed=6, batch=4)
    probs, _ = forward(model, X, mask)
    assert np.all(np.abs(probs.sum(axis=1) - 1.0) < 1e-6)
    assert np.all((probs >= 0) & (probs <= 1))


def test_padding_does_not_change_result():
    model = tiny_model()
    rng = np.random.default_rng(8)
    seq = rng.normal(size=(3, 5))
    X1, m1 = assemble_batch([seq], max_len=3)
    X2 = np.zeros((1, 5, 5))
    X2[0, :3] = seq
    m2 = np.zeros((1, 5))
    m2[0, :3] = 1.0
    p1, _ = forward(model, X1, m1)
    p2, _ = forward(model, X2, m2)
    assert np.allclose(p1, p2, atol=1e-12)


def test_empty_sequence_rejected_at_batch_assembly():
    with pytest.raises(ValueError):
        assemble_batch([np.zeros((0, 5))], max_len=4)


def planted_setup(seed=7):
    rng = np.random.default_rng(seed)
    vocab = [f"w{i}" for i in range(30)]
    marker = "flagword"

    def make_seq(pos):
        toks = [str(t) for t in rng.choice(vocab, size=int(rng.integers(4, 9)))]
        if pos:
            toks.insert(int(rng.integers(0, len(toks))), marker)
        return toks

    data = [(make_seq(i % 2 == 0), 1 if i % 2 == 0 else 0) for i in range(200)]
    emb = train_cbow(
        [t for t, _ in data],
        CbowConfig(embedding_size=16, window=3, min_count=1, subsample=0.5, negatives=3, epochs=3, seed=3),
    )
    return data, emb


def test_marker_class_learned_on_holdout():
    data, emb = planted_setup()
    train, dev, test = data[:140], data[140:170], data[170:]
    model = train_recurrent(
        train, emb, hidden_size=16, batch_size=32, max_epochs=40, step_size=0.02, seed=0, dev=dev, patience=10
    )
    probs = predict_proba_recurrent(model, emb, [t for t, _ in test])
    acc = float(np.mean((probs > 0.5) == np.array([y for _, y in test])))
    assert acc >= 0.95


def test_training_deterministic_given_seed():
    data, emb = planted_setup(seed=11)
    kwargs = dict(hidden_size=8, batch_size=32, max_epochs=3, seed=42)
    m1 = train_recurrent(data[:80], emb, **kwargs)
    m2 = train_recurrent(data[:80], emb, **kwargs)
    for name in m1.params():
        assert np.array_equal(m1.params()[name], m2.params()[name])


def test_truncation_to_percentile_length():
    emb = EmbeddingMatrix(vectors=np.ones((2, 3)), index={"<unk>": 0, "a": 1}, unk_index=0)
    data = [(["a"] * (4 + i % 3), i % 2) for i in range(150)] + [(["a"] * 300, 1)]
    model = train_recurrent(data, emb, hidden_size=4, batch_size=64, max_epochs=1, seed=0)
    assert model.max_len < 300  # the single outlier sits beyond the 99th percentile
