"""CART decision tree and bagged random forest, Gini impurity.

Splits are exhaustive over midpoints between consecutive distinct feature
values; ties break toward the lowest feature index, then the lowest
threshold, so training is invariant to sample order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class TreeNode:
    probs: np.ndarray  # class distribution at this node, [P(y=0), P(y=1)]
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class TreeModel:
    root: TreeNode
    max_depth: int
    n_features: int


@dataclass
class ForestModel:
    trees: list[TreeModel]
    seed: int
    n_features: int


def _node_probs(y: np.ndarray) -> np.ndarray:
    counts = np.bincount(y, minlength=2).astype(np.float64)
    return counts / counts.sum()


def _gini_from_counts(pos: float, total: float) -> float:
    if total == 0:
        return 0.0
    p = pos / total
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_split(X: np.ndarray, y: np.ndarray, feature_ids) -> tuple[int, float] | None:
    """Lowest weighted-Gini (feature, threshold) over all candidate splits,
    or None when every candidate feature is constant."""
    n = y.size
    best = None
    best_score = np.inf
    for j in feature_ids:
        values = X[:, j]
        order = np.argsort(values, kind="stable")
        v_sorted = values[order]
        y_sorted = y[order]
        pos_prefix = np.cumsum(y_sorted)
        total_pos = pos_prefix[-1]
        for cut in range(1, n):
            if v_sorted[cut] == v_sorted[cut - 1]:
                continue
            left_n = cut
            left_pos = pos_prefix[cut - 1]
            score = (
                left_n * _gini_from_counts(left_pos, left_n)
                + (n - left_n) * _gini_from_counts(total_pos - left_pos, n - left_n)
            ) / n
            if score < best_score:
                best_score = score
                best = (int(j), float((v_sorted[cut - 1] + v_sorted[cut]) / 2.0))
    return best


def _grow(X, y, depth, max_depth, max_features, rng) -> TreeNode:
    node = TreeNode(probs=_node_probs(y))
    if depth >= max_depth or y.size < 2 or node.probs.max() == 1.0:
        return node
    d = X.shape[1]
    if max_features is not None and max_features < d:
        feature_ids = np.sort(rng.choice(d, size=max_features, replace=False))
    else:
        feature_ids = range(d)
    split = _best_split(X, y, feature_ids)
    if split is None:
        return node
    node.feature, node.threshold = split
    mask = X[:, node.feature] <= node.threshold
    node.left = _grow(X[mask], y[mask], depth + 1, max_depth, max_features, rng)
    node.right = _grow(X[~mask], y[~mask], depth + 1, max_depth, max_features, rng)
    return node


def train_tree(X, y, max_depth: int = 30, max_features: int | None = None, rng=None) -> TreeModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if y.size == 0:
        raise ValueError("training data is empty")
    if rng is None:
        rng = np.random.default_rng(0)
    root = _grow(X, y, 0, max_depth, max_features, rng)
    return TreeModel(root=root, max_depth=max_depth, n_features=X.shape[1])


def predict_proba_tree(model: TreeModel, X) -> np.ndarray:
    """Positive-class leaf fraction per row."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    out = np.empty(X.shape[0])
    for i, row in enumerate(X):
        node = model.root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        out[i] = node.probs[1]
    return out


def train_forest(
    X,
    y,
    n_trees: int = 90,
    max_depth: int = 15,
    max_features: int | None = 300,
    bootstrap: bool = True,
    seed: int = 0,
) -> ForestModel:
    """Bagged CART trees; each split draws its own candidate-feature subset.

    Tree t uses an independent random stream derived from (seed, t), so
    results do not depend on training order.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if y.size == 0:
        raise ValueError("training data is empty")
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng([seed, t])
        if bootstrap:
            idx = rng.integers(0, y.size, y.size)
            Xt, yt = X[idx], y[idx]
        else:
            Xt, yt = X, y
        trees.append(train_tree(Xt, yt, max_depth=max_depth, max_features=max_features, rng=rng))
    return ForestModel(trees=trees, seed=seed, n_features=X.shape[1])


def predict_proba_forest(model: ForestModel, X) -> np.ndarray:
    """Mean of the member trees' leaf probabilities."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    acc = np.zeros(X.shape[0])
    for tree in model.trees:
        acc += predict_proba_tree(tree, X)
    return acc / len(model.trees)
