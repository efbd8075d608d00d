"""Tokenization shared by every text consumer.

One convention for the whole toolkit: lowercase, split on any run of
characters that is not a Unicode letter or digit, then stem each token.
No stopword removal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable

from . import porter

# maximal runs of letters/digits; underscore and all punctuation separate
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class TokenizedText:
    """An ordered sequence of stemmed lowercase terms."""

    tokens: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def tokenize(text: str, stemmer: Callable[[str], str] = porter.stem) -> TokenizedText:
    """Lowercase, split, and stem. Total and deterministic; '' gives no tokens."""
    raw = _TOKEN_RE.findall(text.lower())
    return TokenizedText(tokens=tuple(stemmer(t) for t in raw))


def from_tokens(tokens: Iterable[str]) -> TokenizedText:
    """Wrap pre-split tokens without re-tokenizing (for tests and readers)."""
    return TokenizedText(tokens=tuple(tokens))


def concat_answers(answer1: str, answer2: str) -> str:
    """Join the two answer texts with a single space; empty operands vanish."""
    parts = [a for a in (answer1, answer2) if a]
    return " ".join(parts)
