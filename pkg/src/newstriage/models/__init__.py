"""Five from-scratch classifiers, each exposing P(y=1|x)."""

from __future__ import annotations

import numpy as np

from ..features.ngrams import SparseVector
from .logistic import LinearModel, bce_gradient, decision_linear, objective, predict_proba_linear, train_logistic
from .losses import bce_loss
from .lstm import RecurrentModel, predict_proba_recurrent, train_recurrent
from .svm import KernelSvmModel, decision_function, predict_proba_svm, train_svm_smo
from .tree import ForestModel, TreeModel, predict_proba_forest, predict_proba_tree, train_forest, train_tree

MODEL_KINDS = ("lr", "svm", "tree", "forest", "lstm")


def predict_proba(model, x, embeddings=None) -> float:
    """P(y=1|x) for a single input, dispatched on the model kind.

    Vector models take a SparseVector (or dense row); the recurrent model
    takes a token sequence plus its embedding matrix. A mismatched input
    representation raises TypeError.
    """
    if isinstance(model, LinearModel):
        if not isinstance(x, SparseVector):
            raise TypeError("linear model scores SparseVector inputs")
        return predict_proba_linear(model, x)
    if isinstance(model, KernelSvmModel):
        if not isinstance(x, SparseVector):
            raise TypeError("svm model scores SparseVector inputs")
        return predict_proba_svm(model, x)
    if isinstance(model, TreeModel):
        row = x.to_dense() if isinstance(x, SparseVector) else np.asarray(x, dtype=np.float64)
        return float(predict_proba_tree(model, row[None, :])[0])
    if isinstance(model, ForestModel):
        row = x.to_dense() if isinstance(x, SparseVector) else np.asarray(x, dtype=np.float64)
        return float(predict_proba_forest(model, row[None, :])[0])
    if isinstance(model, RecurrentModel):
        if isinstance(x, SparseVector) or embeddings is None:
            raise TypeError("recurrent model scores token sequences and needs an embedding matrix")
        return float(predict_proba_recurrent(model, embeddings, [list(x)])[0])
    raise TypeError(f"unknown model type {type(model).__name__}")


__all__ = [
    "MODEL_KINDS",
    "LinearModel",
    "KernelSvmModel",
    "TreeModel",
    "ForestModel",
    "RecurrentModel",
    "bce_loss",
    "bce_gradient",
    "objective",
    "decision_linear",
    "decision_function",
    "predict_proba",
    "predict_proba_linear",
    "predict_proba_svm",
    "predict_proba_tree",
    "predict_proba_forest",
    "predict_proba_recurrent",
    "train_logistic",
    "train_svm_smo",
    "train_tree",
    "train_forest",
    "train_recurrent",
]
