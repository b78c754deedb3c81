"""Tokenization, n-gram sets, token-level edit distance and the discrete
style block computed between a text and one of its rewrites."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._accel import kernels

__all__ = [
    "TokenizerConfig",
    "TokenSequence",
    "NGramSet",
    "DiscreteStyleBlock",
    "tokenize",
    "ngram_set",
    "ngram_overlap_feature",
    "edit_distance",
    "edit_similarity_feature",
    "discrete_block",
]

SENTENCE_END = frozenset({".", "!", "?"})


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    source_length_chars: int = 0

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, item):
        return self.tokens[item]

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class NGramSet:
    n: int
    grams: frozenset

    def __len__(self) -> int:
        return len(self.grams)


@dataclass(frozen=True)
class DiscreteStyleBlock:
    v_n: float
    v_edit: float


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _split_chunk(chunk: str) -> list[str]:
    start, end = 0, len(chunk)
    while start < end and _is_punct(chunk[start]):
        start += 1
    while end > start and _is_punct(chunk[end - 1]):
        end -= 1
    return list(chunk[:start]) + ([chunk[start:end]] if start < end else []) + list(chunk[end:])


def tokenize(text: str, config: TokenizerConfig | None = None) -> TokenSequence:
    """Whitespace split with leading/trailing punctuation detached.

    Each boundary punctuation character becomes its own token; punctuation
    inside a word (``don't``, ``e-mail``) stays attached.

    >>> tokenize("The cat sat.").tokens
    ('the', 'cat', 'sat', '.')
    """
    config = config or TokenizerConfig()
    if config.lowercase:
        text_norm = text.lower()
    else:
        text_norm = text
    tokens: list[str] = []
    for chunk in text_norm.split():
        tokens.extend(_split_chunk(chunk))
    return TokenSequence(tuple(tokens), len(text))


def _tokens(seq: TokenSequence | Sequence[str]) -> tuple[str, ...]:
    if isinstance(seq, TokenSequence):
        return seq.tokens
    return tuple(seq)


def ngram_set(seq: TokenSequence | Sequence[str], n: int) -> NGramSet:
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    toks = _tokens(seq)
    grams = frozenset(toks[i:i + n] for i in range(len(toks) - n + 1))
    return NGramSet(n, grams)


def ngram_overlap_feature(
    x: TokenSequence | Sequence[str],
    x_hat: TokenSequence | Sequence[str],
    n1: int = 1,
    n2: int = 4,
    normalize: bool = False,
) -> float:
    """Sum over n in [n1, n2] of shared distinct n-grams, divided by n2 - n1.

    The divisor excludes one order on purpose (the sum has n2 - n1 + 1
    terms). With ``normalize=True`` each intersection is first divided by
    the larger of the two distinct-gram counts.
    """
    if n1 < 1 or n1 >= n2:
        raise ValueError(f"need 1 <= n1 < n2, got n1={n1}, n2={n2}")
    a, b = _tokens(x), _tokens(x_hat)
    total = 0.0
    for n in range(n1, n2 + 1):
        ga, gb = ngram_set(a, n).grams, ngram_set(b, n).grams
        shared = len(ga & gb)
        if normalize:
            denom = max(len(ga), len(gb))
            total += shared / denom if denom else 0.0
        else:
            total += shared
    return total / (n2 - n1)


def _encode(a: Iterable, b: Iterable) -> tuple[np.ndarray, np.ndarray]:
    vocab: dict = {}
    ia = np.fromiter((vocab.setdefault(t, len(vocab)) for t in a), dtype=np.int64)
    ib = np.fromiter((vocab.setdefault(t, len(vocab)) for t in b), dtype=np.int64)
    return ia, ib


def edit_distance(x: TokenSequence | Sequence[str], x_hat: TokenSequence | Sequence[str]) -> int:
    """Levenshtein distance over tokens (unit insert/delete/substitute)."""
    ia, ib = _encode(_tokens(x), _tokens(x_hat))
    return int(kernels.levenshtein(ia, ib))


def edit_similarity_feature(
    x: TokenSequence | Sequence[str],
    x_hat: TokenSequence | Sequence[str],
    level: str = "word",
) -> float:
    """``1 - L / max(len)``; 1.0 when both sides are empty.

    ``level="char"`` runs the same recursion over the characters of the
    space-joined token strings and normalizes by the longer character
    count, which keeps the value in [0, 1].
    """
    a, b = _tokens(x), _tokens(x_hat)
    if level == "word":
        pass
    elif level == "char":
        a, b = tuple(" ".join(a)), tuple(" ".join(b))
    else:
        raise ValueError(f"unknown edit level {level!r}")
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - edit_distance(a, b) / longest


def discrete_block(
    x: TokenSequence | Sequence[str],
    x_hat: TokenSequence | Sequence[str],
    n1: int = 1,
    n2: int = 4,
    normalize_overlap: bool = False,
    edit_level: str = "word",
) -> DiscreteStyleBlock:
    return DiscreteStyleBlock(
        v_n=ngram_overlap_feature(x, x_hat, n1, n2, normalize=normalize_overlap),
        v_edit=edit_similarity_feature(x, x_hat, level=edit_level),
    )
