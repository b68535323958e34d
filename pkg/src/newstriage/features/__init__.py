from .cbow import (
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
from .ngrams import (
    SparseVector,
    Vocabulary,
    build_vocabulary,
    load_vocabulary,
    save_vocabulary,
    stack_vectors,
    vectorize_ngrams,
)
from .tokenize import MODES, tokenize

__all__ = [
    "CbowConfig",
    "EmbeddingMatrix",
    "MODES",
    "SparseVector",
    "UNK_TOKEN",
    "Vocabulary",
    "build_vocabulary",
    "embed_sequence",
    "load_embeddings",
    "load_vocabulary",
    "pair_gradients",
    "pair_loss",
    "save_embeddings",
    "save_vocabulary",
    "stack_vectors",
    "tokenize",
    "train_cbow",
    "vectorize_ngrams",
]
