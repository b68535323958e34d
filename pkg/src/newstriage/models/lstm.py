"""LSTM sequence classifier trained by backpropagation through time.

Forward pass: embedded tokens -> LSTM -> mean of hidden states over real
(non-padded) steps -> linear layer -> 2-way softmax. Embedding vectors are
fixed inputs; the trainable parameters are the gate weights and the
readout. Training uses Adam with global-norm gradient clipping and early
stopping on development loss.

Gate slabs are packed [input, forget, cell, output] along the last axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..features.cbow import EmbeddingMatrix, embed_sequence

PARAM_NAMES = ("wx", "wh", "b", "w_out", "b_out")


@dataclass
class RecurrentModel:
    wx: np.ndarray  # (input_dim, 4H)
    wh: np.ndarray  # (H, 4H)
    b: np.ndarray  # (4H,)
    w_out: np.ndarray  # (H, 2)
    b_out: np.ndarray  # (2,)
    max_len: int = 0
    train_loss: list[float] = field(default_factory=list, repr=False)
    dev_loss: list[float] = field(default_factory=list, repr=False)

    @property
    def hidden_size(self) -> int:
        return self.wh.shape[0]

    @property
    def input_size(self) -> int:
        return self.wx.shape[0]

    def params(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}


def init_recurrent(input_size: int, hidden_size: int = 200, seed: int = 42) -> RecurrentModel:
    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(hidden_size)
    b = np.zeros(4 * hidden_size)
    b[hidden_size : 2 * hidden_size] = 1.0  # forget-gate bias starts open
    return RecurrentModel(
        wx=rng.uniform(-scale, scale, (input_size, 4 * hidden_size)),
        wh=rng.uniform(-scale, scale, (hidden_size, 4 * hidden_size)),
        b=b,
        w_out=rng.uniform(-scale, scale, (hidden_size, 2)),
        b_out=np.zeros(2),
    )


def _sigmoid(z):
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.clip(z, 0, None))), np.exp(np.clip(z, None, 0)) / (1.0 + np.exp(np.clip(z, None, 0))))


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: RecurrentModel, X: np.ndarray, mask: np.ndarray):
    """Class probabilities for a padded batch.

    X is (batch, T, input_dim); mask is (batch, T) with 1.0 on real steps.
    Padded steps carry the previous hidden and cell state through and are
    excluded from the temporal mean.
    """
    B, T, _ = X.shape
    H = model.hidden_size
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    steps = []
    for t in range(T):
        pre = X[:, t] @ model.wx + h @ model.wh + model.b
        i = _sigmoid(pre[:, :H])
        f = _sigmoid(pre[:, H : 2 * H])
        g = np.tanh(pre[:, 2 * H : 3 * H])
        o = _sigmoid(pre[:, 3 * H :])
        c_new = f * c + i * g
        tanh_c = np.tanh(c_new)
        h_new = o * tanh_c
        m = mask[:, t : t + 1]
        h_next = m * h_new + (1.0 - m) * h
        c_next = m * c_new + (1.0 - m) * c
        steps.append({"i": i, "f": f, "g": g, "o": o, "c_prev": c, "h_prev": h, "tanh_c": tanh_c, "m": m, "h_masked": h_next})
        h, c = h_next, c_next
    lengths = mask.sum(axis=1, keepdims=True)
    if np.any(lengths == 0):
        raise ValueError("batch contains a sequence with no real steps")
    mean_h = sum(step["h_masked"] * step["m"] for step in steps) / lengths
    logits = mean_h @ model.w_out + model.b_out
    probs = _softmax(logits)
    cache = {"steps": steps, "mean_h": mean_h, "probs": probs, "X": X, "mask": mask, "lengths": lengths}
    return probs, cache


def batch_loss(model: RecurrentModel, X, mask, y) -> float:
    probs, _ = forward(model, X, mask)
    return float(-np.log(np.clip(probs[np.arange(y.size), y], 1e-12, None)).mean())


def loss_and_grads(model: RecurrentModel, X, mask, y):
    """Mean cross-entropy over the batch and gradients for every
    trainable parameter."""
    y = np.asarray(y, dtype=np.int64)
    probs, cache = forward(model, X, mask)
    B, T, _ = X.shape
    H = model.hidden_size

    loss = float(-np.log(np.clip(probs[np.arange(B), y], 1e-12, None)).mean())
    dlogits = probs.copy()
    dlogits[np.arange(B), y] -= 1.0
    dlogits /= B

    grads = {
        "w_out": cache["mean_h"].T @ dlogits,
        "b_out": dlogits.sum(axis=0),
        "wx": np.zeros_like(model.wx),
        "wh": np.zeros_like(model.wh),
        "b": np.zeros_like(model.b),
    }
    dmean = dlogits @ model.w_out.T

    dh_carry = np.zeros((B, H))
    dc_carry = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        step = cache["steps"][t]
        m = step["m"]
        dh_total = dh_carry + dmean * (m / cache["lengths"])
        dc_total = dc_carry
        # masked steps pass state (and therefore gradient) straight through
        dh_new = dh_total * m
        dc_new = dc_total * m
        dh_prev_skip = dh_total * (1.0 - m)
        dc_prev_skip = dc_total * (1.0 - m)

        do = dh_new * step["tanh_c"]
        dc_new = dc_new + dh_new * step["o"] * (1.0 - step["tanh_c"] ** 2)
        di = dc_new * step["g"]
        df = dc_new * step["c_prev"]
        dg = dc_new * step["i"]
        dc_prev = dc_new * step["f"]

        dpre = np.concatenate(
            [
                di * step["i"] * (1.0 - step["i"]),
                df * step["f"] * (1.0 - step["f"]),
                dg * (1.0 - step["g"] ** 2),
                do * step["o"] * (1.0 - step["o"]),
            ],
            axis=1,
        )
        grads["wx"] += X[:, t].T @ dpre
        grads["wh"] += step["h_prev"].T @ dpre
        grads["b"] += dpre.sum(axis=0)
        dh_carry = dpre @ model.wh.T + dh_prev_skip
        dc_carry = dc_prev + dc_prev_skip
    return loss, grads


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> None:
    total = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale


class AdamState:
    def __init__(self, model: RecurrentModel, step_size: float, beta1: float, beta2: float, eps: float = 1e-8):
        self.step_size = step_size
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in model.params().items()}
        self.v = {k: np.zeros_like(v) for k, v in model.params().items()}

    def update(self, model: RecurrentModel, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        for k, g in grads.items():
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            m_hat = self.m[k] / (1.0 - self.beta1**self.t)
            v_hat = self.v[k] / (1.0 - self.beta2**self.t)
            getattr(model, k)[...] -= self.step_size * m_hat / (np.sqrt(v_hat) + self.eps)


def assemble_batch(sequences: list[np.ndarray], max_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Pad embedded sequences to a common length, truncating at max_len.
    A zero-length sequence is an error."""
    if any(seq.shape[0] == 0 for seq in sequences):
        raise ValueError("cannot assemble a batch containing an empty sequence")
    dim = sequences[0].shape[1]
    T = min(max(seq.shape[0] for seq in sequences), max_len)
    X = np.zeros((len(sequences), T, dim))
    mask = np.zeros((len(sequences), T))
    for i, seq in enumerate(sequences):
        n = min(seq.shape[0], T)
        X[i, :n] = seq[:n]
        mask[i, :n] = 1.0
    return X, mask


def train_recurrent(
    data: list[tuple[list[str], int]],
    emb: EmbeddingMatrix,
    hidden_size: int = 200,
    batch_size: int = 100,
    max_epochs: int = 50,
    step_size: float = 0.002,
    beta1: float = 0.9,
    beta2: float = 0.999,
    patience: int = 5,
    grad_clip: float = 5.0,
    seed: int = 42,
    dev: list[tuple[list[str], int]] | None = None,
) -> RecurrentModel:
    """Train on (token sequence, label) pairs.

    Sequences are padded to the 99th-percentile training length. With a
    dev set, training stops once dev loss has not improved for `patience`
    epochs and the best parameters are restored.
    """
    if not data:
        raise ValueError("training data is empty")
    sequences = [embed_sequence(tokens, emb) for tokens, _ in data]
    labels = np.array([label for _, label in data], dtype=np.int64)
    lengths = [seq.shape[0] for seq in sequences]
    if min(lengths) == 0:
        raise ValueError("cannot assemble a batch containing an empty sequence")
    max_len = max(1, int(np.ceil(np.percentile(lengths, 99))))

    model = init_recurrent(emb.dim, hidden_size, seed=seed)
    model.max_len = max_len
    adam = AdamState(model, step_size, beta1, beta2)
    rng = np.random.default_rng(seed)

    dev_batches = None
    if dev:
        dev_seqs = [embed_sequence(tokens, emb) for tokens, _ in dev]
        dev_labels = np.array([label for _, label in dev], dtype=np.int64)
        dev_batches = (dev_seqs, dev_labels)

    best_loss = np.inf
    best_params = None
    stall = 0
    for _ in range(max_epochs):
        order = rng.permutation(len(sequences))
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, order.size, batch_size):
            idx = order[start : start + batch_size]
            X, mask = assemble_batch([sequences[i] for i in idx], max_len)
            loss, grads = loss_and_grads(model, X, mask, labels[idx])
            clip_global_norm(grads, grad_clip)
            adam.update(model, grads)
            epoch_loss += loss
            n_batches += 1
        model.train_loss.append(epoch_loss / max(n_batches, 1))

        if dev_batches is not None:
            X, mask = assemble_batch(dev_batches[0], max_len)
            dev_loss = batch_loss(model, X, mask, dev_batches[1])
            model.dev_loss.append(dev_loss)
            if dev_loss < best_loss - 1e-9:
                best_loss = dev_loss
                best_params = {k: v.copy() for k, v in model.params().items()}
                stall = 0
            else:
                stall += 1
                if stall >= patience:
                    break
    if best_params is not None:
        for k, v in best_params.items():
            getattr(model, k)[...] = v
    return model


def predict_proba_recurrent(model: RecurrentModel, emb: EmbeddingMatrix, token_seqs: list[list[str]]) -> np.ndarray:
    """P(y=1|x) for each token sequence."""
    sequences = [embed_sequence(tokens, emb) for tokens in token_seqs]
    X, mask = assemble_batch(sequences, model.max_len or max(s.shape[0] for s in sequences))
    probs, _ = forward(model, X, mask)
    return probs[:, 1]
