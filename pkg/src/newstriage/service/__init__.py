from .core import (
    DuplicateVerdictError,
    FeedbackLog,
    InvalidVerdictError,
    QueueState,
    ServiceError,
    TriageService,
    UnknownArticleError,
    Verdict,
    apply_feedback,
    article_id,
)

__all__ = [
    "DuplicateVerdictError",
    "FeedbackLog",
    "InvalidVerdictError",
    "QueueState",
    "ServiceError",
    "TriageService",
    "UnknownArticleError",
    "Verdict",
    "apply_feedback",
    "article_id",
]
