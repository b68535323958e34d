"""Binary cross-entropy loss."""

from __future__ import annotations

import numpy as np

PROB_EPS = 1e-12


def bce_loss(probabilities, labels) -> float:
    """-sum_i [y_i log p_i + (1-y_i) log(1-p_i)], probabilities clamped to
    [eps, 1-eps]."""
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if p.shape != y.shape:
        raise ValueError(f"length mismatch: {p.shape} probabilities vs {y.shape} labels")
    p = np.clip(p, PROB_EPS, 1.0 - PROB_EPS)
    return float(-np.sum(y * np.log(p) + (1.0 - y) * np.log1p(-p)))
