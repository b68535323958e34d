"""Tokenizers turning comment text into word sequences.

Whitespace mode suits pre-segmented text; char_bigram is the fallback for
unsegmented scripts and emits overlapping character bigrams per chunk.
"""

from __future__ import annotations

import unicodedata

MODES = ("whitespace", "char_bigram")


def tokenize(text: str, mode: str = "whitespace") -> list[str]:
    if mode == "whitespace":
        return _whitespace_tokens(text)
    if mode == "char_bigram":
        return _char_bigrams(text)
    raise ValueError(f"unknown tokenizer mode {mode!r}")


def _whitespace_tokens(text: str) -> list[str]:
    # split on Unicode whitespace, then peel punctuation (category P*)
    # into standalone tokens
    tokens: list[str] = []
    for chunk in text.split():
        run = ""
        for ch in chunk:
            if unicodedata.category(ch).startswith("P"):
                if run:
                    tokens.append(run)
                    run = ""
                tokens.append(ch)
            else:
                run += ch
        if run:
            tokens.append(run)
    return tokens


def _char_bigrams(text: str) -> list[str]:
    tokens: list[str] = []
    for chunk in text.split():
        if len(chunk) == 1:
            tokens.append(chunk)
        else:
            tokens.extend(chunk[i : i + 2] for i in range(len(chunk) - 1))
    return tokens
