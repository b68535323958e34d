"""Soft-margin RBF-kernel SVM solved by sequential minimal optimization.

The dual min (1/2) a'Qa - e'a with 0 <= a <= C, y'a = 0 is optimized by
maximal-violating-pair working-set selection. Probability outputs come
from a Platt sigmoid fitted on decision values of an internal 3-fold
split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..corpus import stratified_folds
from ..features.ngrams import SparseVector
from .logistic import as_csr


@dataclass
class KernelSvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for the support vectors
    bias: float
    gamma: float
    c: float
    platt_a: float = 0.0
    platt_b: float = 0.0
    # full training-time solution, kept for constraint checks
    alpha: np.ndarray | None = None
    labels_pm: np.ndarray | None = None


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A = as_csr(A)
    B = as_csr(B)
    a2 = np.asarray(A.multiply(A).sum(axis=1)).ravel()
    b2 = np.asarray(B.multiply(B).sum(axis=1)).ravel()
    sq = a2[:, None] + b2[None, :] - 2.0 * (A @ B.T).toarray()
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def default_gamma(X) -> float:
    """1 / (n_features * variance of all matrix entries), the usual scale
    heuristic."""
    X = as_csr(X)
    n, d = X.shape
    total = n * d
    mean = X.sum() / total
    mean_sq = X.multiply(X).sum() / total
    var = max(mean_sq - mean * mean, 0.0)
    return 1.0 / (d * var) if var > 0 else 1.0 / d


def dual_objective(K: np.ndarray, y_pm: np.ndarray, alpha: np.ndarray) -> float:
    qa = y_pm * (K @ (alpha * y_pm))
    return float(0.5 * alpha @ qa - alpha.sum())


def smo_solve(K: np.ndarray, y_pm: np.ndarray, c: float, tol: float = 1e-3, max_iter: int = 10_000_000):
    """Run SMO on a precomputed kernel. Returns (alpha, bias, converged).

    The stopping rule is the standard pairwise optimality gap
    max_{I_up} -y g  -  min_{I_low} -y g <= tol.
    """
    n = y_pm.size
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual at alpha = 0
    pos = y_pm > 0
    converged = False

    for _ in range(max_iter):
        at_upper = alpha >= c - 1e-12 * c
        at_lower = alpha <= 1e-12 * c
        mask_up = (pos & ~at_upper) | (~pos & ~at_lower)
        mask_low = (~pos & ~at_upper) | (pos & ~at_lower)
        if not mask_up.any() or not mask_low.any():
            converged = True
            break
        score = -y_pm * grad
        i = np.flatnonzero(mask_up)[np.argmax(score[mask_up])]
        j = np.flatnonzero(mask_low)[np.argmin(score[mask_low])]
        if score[i] - score[j] <= tol:
            converged = True
            break

        a = K[i, i] + K[j, j] - 2.0 * K[i, j]
        t = (score[i] - score[j]) / max(a, 1e-12)
        # clip the step so both multipliers stay inside [0, C]
        if y_pm[i] > 0:
            lo, hi = -alpha[i], c - alpha[i]
        else:
            lo, hi = alpha[i] - c, alpha[i]
        if y_pm[j] > 0:
            lo, hi = max(lo, alpha[j] - c), min(hi, alpha[j])
        else:
            lo, hi = max(lo, -alpha[j]), min(hi, c - alpha[j])
        t = min(max(t, lo), hi)
        if t == 0.0:
            converged = True
            break

        d_i = y_pm[i] * t
        d_j = -y_pm[j] * t
        alpha[i] += d_i
        alpha[j] += d_j
        grad += y_pm * (K[:, i] * (y_pm[i] * d_i) + K[:, j] * (y_pm[j] * d_j))

    bias = _bias_from_solution(K, y_pm, alpha, grad, c)
    return alpha, bias, converged


def _bias_from_solution(K, y_pm, alpha, grad, c) -> float:
    free = (alpha > 1e-8 * c) & (alpha < c - 1e-8 * c)
    score = -y_pm * grad  # equals y_i - sum_t alpha_t y_t K_ti
    if free.any():
        return float(score[free].mean())
    at_upper = alpha >= c - 1e-12 * c
    at_lower = alpha <= 1e-12 * c
    pos = y_pm > 0
    mask_up = (pos & ~at_upper) | (~pos & ~at_lower)
    mask_low = (~pos & ~at_upper) | (pos & ~at_lower)
    hi = score[mask_up].max() if mask_up.any() else 0.0
    lo = score[mask_low].min() if mask_low.any() else 0.0
    return float((hi + lo) / 2.0)


def fit_platt(scores, labels, max_iter: int = 100) -> tuple[float, float]:
    """Sigmoid calibration P(y=1|f) = 1 / (1 + exp(A f + B)) by Newton
    descent with backtracking on regularized targets."""
    f = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    n_pos = float(y.sum())
    n_neg = float(y.size - n_pos)
    t = np.where(y > 0, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def value(a, b):
        z = a * f + b
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)), (t - 1.0) * z + np.log1p(np.exp(z)))))

    a, b = 0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))
    best = value(a, b)
    sigma = 1e-12
    for _ in range(max_iter):
        z = a * f + b
        p = np.where(z >= 0, np.exp(-z) / (1.0 + np.exp(-z)), 1.0 / (1.0 + np.exp(z)))
        d1 = t - p
        d2 = p * (1.0 - p)
        g_a = float(f @ d1)
        g_b = float(d1.sum())
        if abs(g_a) < 1e-5 and abs(g_b) < 1e-5:
            break
        h11 = float(f * f @ d2) + sigma
        h22 = float(d2.sum()) + sigma
        h12 = float(f @ d2)
        det = h11 * h22 - h12 * h12
        da = -(h22 * g_a - h12 * g_b) / det
        db = -(-h12 * g_a + h11 * g_b) / det
        gd = g_a * da + g_b * db
        step = 1.0
        while step >= 1e-10:
            na, nb = a + step * da, b + step * db
            nv = value(na, nb)
            if nv < best + 1e-4 * step * gd:
                a, b, best = na, nb, nv
                break
            step /= 2.0
        else:
            break
    return a, b


def train_svm_smo(
    X,
    y,
    c: float = 3000.0,
    gamma: float | None = None,
    tol: float = 1e-3,
    seed: int = 0,
    calibrate: bool = True,
) -> KernelSvmModel:
    X = as_csr(X)
    y01 = np.asarray(y, dtype=np.float64)
    if y01.min() == y01.max():
        raise ValueError("training data must contain both classes")
    y_pm = np.where(y01 > 0, 1.0, -1.0)
    _reject_degenerate(X, y_pm)
    if gamma is None:
        gamma = default_gamma(X)

    K = rbf_kernel(X, X, gamma)
    alpha, bias, _ = smo_solve(K, y_pm, c, tol=tol)

    sv = alpha > 1e-10 * c
    model = KernelSvmModel(
        support_vectors=X[np.flatnonzero(sv)].toarray(),
        dual_coef=(alpha * y_pm)[sv],
        bias=bias,
        gamma=gamma,
        c=c,
        alpha=alpha,
        labels_pm=y_pm,
    )
    if calibrate:
        model.platt_a, model.platt_b = _calibration(X, y01, y_pm, c, gamma, tol, seed, model)
    return model


def _reject_degenerate(X, y_pm) -> None:
    col_min = X.min(axis=0).toarray().ravel()
    col_max = X.max(axis=0).toarray().ravel()
    if np.array_equal(col_min, col_max):
        raise ValueError("degenerate kernel: all training points are identical across classes")


def _calibration(X, y01, y_pm, c, gamma, tol, seed, full_model) -> tuple[float, float]:
    counts = np.bincount(y01.astype(int), minlength=2)
    if counts.min() < 3:
        # not enough samples per class for a held-out fit
        return fit_platt(decision_function(full_model, X), y01)
    folds = stratified_folds(y01.astype(int), 3, seed)
    scores = np.zeros(y01.size)
    for f in range(3):
        tr = folds.train_indices(f)
        te = folds.test_indices(f)
        sub_K = rbf_kernel(X[tr], X[tr], gamma)
        sub_alpha, sub_bias, _ = smo_solve(sub_K, y_pm[tr], c, tol=tol)
        cross = rbf_kernel(X[te], X[tr], gamma)
        scores[te] = cross @ (sub_alpha * y_pm[tr]) + sub_bias
    return fit_platt(scores, y01)


def decision_function(model: KernelSvmModel, x) -> np.ndarray:
    if isinstance(x, SparseVector):
        x = x.to_dense()[None, :]
    K = rbf_kernel(x, model.support_vectors, model.gamma)
    return K @ model.dual_coef + model.bias


def predict_proba_svm(model: KernelSvmModel, x):
    f = decision_function(model, x)
    p = 1.0 / (1.0 + np.exp(model.platt_a * f + model.platt_b))
    if isinstance(x, SparseVector):
        return float(p[0])
    return p
