"""Intrinsic reply metrics: length, unigram entropy, corpus char BLEU-2.

Entropy measures serendipity: average -log2 unigram probability per
generated character, with the unigram model estimated from training
replies. BLEU-2 is a utility for early stopping, not an evaluation
criterion here (two humans answering the same query can share no bigram
at all).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

UNK_SLOT = "<unk>"


class UndefinedMetricError(ValueError):
    """Raised when a metric has no value (e.g. zero characters)."""


class UnigramModel:
    """Add-one-smoothed per-character probabilities over a fixed support.

    The support is the generation vocabulary, so every character in it has
    strictly positive probability and the probabilities sum to one exactly.
    include_unk adds one extra smoothed slot that absorbs characters outside
    the vocabulary (useful when scoring arbitrary text files).
    """

    def __init__(self, counts: dict[str, int], support: Iterable[str],
                 include_unk: bool = False):
        chars = list(dict.fromkeys(support))
        if include_unk and UNK_SLOT not in chars:
            chars.append(UNK_SLOT)
        if not chars:
            raise UndefinedMetricError("unigram support must be nonempty")
        total = sum(counts.get(c, 0) for c in chars) + len(chars)
        self.probs = {c: (counts.get(c, 0) + 1) / total for c in chars}
        self._log2p = {c: math.log2(p) for c, p in self.probs.items()}
        self._unk = UNK_SLOT in self._log2p

    @classmethod
    def from_replies(cls, replies: Iterable[Sequence[str]],
                     support: Iterable[str],
                     include_unk: bool = False) -> "UnigramModel":
        counts: Counter[str] = Counter()
        for reply in replies:
            counts.update(reply)
        return cls(dict(counts), support, include_unk)

    def log2p(self, char: str) -> float:
        got = self._log2p.get(char)
        if got is not None:
            return got
        if self._unk:
            return self._log2p[UNK_SLOT]
        raise UndefinedMetricError(
            f"character {char!r} is outside the unigram support"
        )


def avg_length(replies: Sequence[Sequence[str]]) -> float:
    """Arithmetic mean of reply character counts."""
    if not replies:
        raise UndefinedMetricError("average length needs at least one reply")
    return sum(len(r) for r in replies) / len(replies)


def entropy(replies: Iterable[Sequence[str]], unigram: UnigramModel) -> float:
    """-(1/N) * sum over all reply characters of log2 p(char), in bits."""
    total = 0.0
    count = 0
    for reply in replies:
        for char in reply:
            total -= unigram.log2p(char)
            count += 1
    if count == 0:
        raise UndefinedMetricError("entropy is undefined over zero characters")
    return total / count


def decomposed_entropy(results, unigram: UnigramModel) -> tuple[float, float]:
    """Entropy over keyword characters vs. all remaining characters.

    Expects non-degraded results (keyword present, 1-based keyword_start).
    """
    keyword_chars: list[str] = []
    remaining_chars: list[str] = []
    for res in results:
        if res.keyword is None or res.keyword_start is None:
            raise UndefinedMetricError(
                "entropy decomposition needs a keyword in every result"
            )
        start = res.keyword_start - 1
        end = start + len(res.keyword)
        keyword_chars.extend(res.reply_chars[start:end])
        remaining_chars.extend(res.reply_chars[:start])
        remaining_chars.extend(res.reply_chars[end:])
    return entropy([keyword_chars], unigram), entropy([remaining_chars], unigram)


def _ngram_counts(seq: Sequence, n: int) -> Counter:
    return Counter(tuple(seq[i : i + n]) for i in range(len(seq) - n + 1))


def bleu2_char(candidates: Sequence[Sequence], references: Sequence[Sequence]) -> float:
    """Corpus-level BLEU with uniform 1/2 weights on modified character
    1-/2-gram precision and the brevity penalty.

    Counts are not smoothed: zero matching bigrams anywhere gives score 0.
    Works over any hashable symbols (characters or char ids).
    """
    if len(candidates) != len(references):
        raise ValueError("candidates and references must be pairwise aligned")
    match = [0, 0]
    guess = [0, 0]
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in (1, 2):
            cand_grams = _ngram_counts(cand, n)
            ref_grams = _ngram_counts(ref, n)
            guess[n - 1] += sum(cand_grams.values())
            match[n - 1] += sum((cand_grams & ref_grams).values())
    if 0 in match or 0 in guess or cand_len == 0:
        return 0.0
    precision = math.sqrt((match[0] / guess[0]) * (match[1] / guess[1]))
    brevity = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * precision


@dataclass
class MetricsReport:
    reply_count: int
    avg_length: float
    entropy: float  # bits per character
    keyword_entropy: float | None = None
    remaining_entropy: float | None = None
    bleu2: float | None = None
    config_sha256: str = ""

    def lines(self) -> list[str]:
        out = [
            f"reply_count={self.reply_count}",
            f"avg_length={self.avg_length:.6f}",
            f"entropy_bits={self.entropy:.6f}",
        ]
        if self.keyword_entropy is not None:
            out.append(f"keyword_entropy_bits={self.keyword_entropy:.6f}")
        if self.remaining_entropy is not None:
            out.append(f"remaining_entropy_bits={self.remaining_entropy:.6f}")
        if self.bleu2 is not None:
            out.append(f"bleu2={self.bleu2:.6f}")
        out.append(f"config_sha256={self.config_sha256}")
        return out

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(self.lines()) + "\n")

    def table(self) -> str:
        rows = [line.split("=", 1) for line in self.lines()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)
