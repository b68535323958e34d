"""Suspicious-news triage.

Scores social-media posts for suspicion casting, aggregates post scores
into article suspiciousness, ranks articles into a review queue for human
fact-checkers, and folds reviewer verdicts back into the training corpus.
"""

__version__ = "0.1.0"
