"""Word-level pointwise mutual information for reply keyword prediction.

Counts are presence-based: a word occurring twice in one utterance counts
once, so p(.) stays interpretable as a per-pair event probability. Add-alpha
smoothing keeps every log finite at desk scale where zero co-occurrence is
common.
"""

from __future__ import annotations

import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .corpus import ConfigError, DialoguePair, NounLexicon

MAGIC = b"PMI1"


class StatsFormatError(ValueError):
    """Raised when a stats file does not match the PMI1 layout."""


@dataclass
class CooccurrenceStats:
    """Pairwise presence counts between query words and lexicon terms."""

    smoothing_alpha: float = 1.0
    lexicon_sha256: str = ""
    config_sha256: str = ""
    pair_total: int = 0
    query_count: Counter = field(default_factory=Counter)
    reply_count: Counter = field(default_factory=Counter)
    joint_count: Counter = field(default_factory=Counter)  # keys (w_q, w_r)

    @property
    def query_vocab_size(self) -> int:
        return len(self.query_count)

    @property
    def reply_term_count(self) -> int:
        return len(self.reply_count)


def accumulate_stats(
    pairs: Iterable[DialoguePair],
    lexicon: NounLexicon,
    smoothing_alpha: float = 1.0,
) -> CooccurrenceStats:
    """Count query-word / reply-term co-occurrence over a paired corpus."""
    stats = CooccurrenceStats(
        smoothing_alpha=smoothing_alpha, lexicon_sha256=lexicon.sha256
    )
    for pair in pairs:
        q_words = set(pair.query_words)
        r_terms = set(pair.reply_words) & lexicon.terms
        for w in q_words:
            stats.query_count[w] += 1
        for t in r_terms:
            stats.reply_count[t] += 1
        for w in q_words:
            for t in r_terms:
                stats.joint_count[(w, t)] += 1
        stats.pair_total += 1
    return stats


def merge_stats(a: CooccurrenceStats, b: CooccurrenceStats) -> CooccurrenceStats:
    """Pointwise sum of two shards counted under the same lexicon/alpha."""
    if a.lexicon_sha256 != b.lexicon_sha256:
        raise ConfigError("cannot merge stats built from different lexicons")
    if a.smoothing_alpha != b.smoothing_alpha:
        raise ConfigError("cannot merge stats with different smoothing alphas")
    merged = CooccurrenceStats(
        smoothing_alpha=a.smoothing_alpha,
        lexicon_sha256=a.lexicon_sha256,
        pair_total=a.pair_total + b.pair_total,
    )
    merged.query_count = a.query_count + b.query_count
    merged.reply_count = a.reply_count + b.reply_count
    merged.joint_count = a.joint_count + b.joint_count
    return merged


def pmi_score(stats: CooccurrenceStats, w_q: str, w_r: str) -> float:
    """log[ p(w_q|w_r) / p(w_q) ] in nats, with add-alpha smoothing.

    p(w_q|w_r) = (joint + a) / (reply_count[w_r] + a*Vq)
    p(w_q)     = (query_count[w_q] + a) / (pair_total + a*Vq)

    where Vq is the observed query vocabulary size. A common w_q has a large
    prior, so its score is pushed down relative to rarer, more mutually
    informative words.
    """
    alpha = stats.smoothing_alpha
    v_q = max(1, stats.query_vocab_size)
    cond = (stats.joint_count[(w_q, w_r)] + alpha) / (
        stats.reply_count[w_r] + alpha * v_q
    )
    prior = (stats.query_count[w_q] + alpha) / (stats.pair_total + alpha * v_q)
    return math.log(cond / prior)


def query_pmi(stats: CooccurrenceStats, query_words: Sequence[str], w_r: str) -> float:
    """Summed PMI of a whole query against one candidate term.

    Query words are deduplicated within the utterance; an empty query scores
    0 by convention.
    """
    return sum(pmi_score(stats, w, w_r) for w in dict.fromkeys(query_words))


@dataclass(frozen=True)
class KeywordPrediction:
    term: str
    score: float  # nats
    per_word: tuple[tuple[str, float], ...]


def predict_keyword(
    stats: CooccurrenceStats,
    query_words: Sequence[str],
    lexicon: NounLexicon,
    k: int = 1,
) -> list[KeywordPrediction]:
    """The k lexicon terms with the largest summed PMI, descending.

    Ties break by larger reply count, then code-point order; rank 1 is the
    argmax keyword.
    """
    if not lexicon.terms:
        raise ConfigError("keyword prediction needs a nonempty lexicon")
    if k < 1:
        raise ConfigError(f"k must be positive, got {k}")
    unique_words = list(dict.fromkeys(query_words))
    scored = []
    for term in lexicon.terms:
        per_word = tuple((w, pmi_score(stats, w, term)) for w in unique_words)
        scored.append(KeywordPrediction(term, sum(c for _, c in per_word), per_word))
    scored.sort(key=lambda p: (-p.score, -stats.reply_count[p.term], p.term))
    return scored[:k]


def _write_table(fh, items: list[tuple[str, int]]) -> None:
    fh.write(struct.pack("<Q", len(items)))
    for key, count in items:
        raw = key.encode("utf-8")
        fh.write(struct.pack("<I", len(raw)))
        fh.write(raw)
        fh.write(struct.pack("<q", count))


def _read_table(fh) -> list[tuple[str, int]]:
    (n,) = struct.unpack("<Q", fh.read(8))
    items = []
    for _ in range(n):
        (klen,) = struct.unpack("<I", fh.read(4))
        key = fh.read(klen).decode("utf-8")
        (count,) = struct.unpack("<q", fh.read(8))
        items.append((key, count))
    return items


def _write_str(fh, s: str) -> None:
    raw = s.encode("utf-8")
    fh.write(struct.pack("<I", len(raw)))
    fh.write(raw)


def _read_str(fh) -> str:
    (n,) = struct.unpack("<I", fh.read(4))
    return fh.read(n).decode("utf-8")


def save_stats(stats: CooccurrenceStats, path, config_sha256: str = "") -> None:
    """Persist stats: magic PMI1, alpha, pair_total, three count tables,
    then lexicon and config hashes."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<d", stats.smoothing_alpha))
        fh.write(struct.pack("<Q", stats.pair_total))
        _write_table(fh, sorted(stats.query_count.items()))
        _write_table(fh, sorted(stats.reply_count.items()))
        _write_table(
            fh, sorted((q + "\t" + r, c) for (q, r), c in stats.joint_count.items())
        )
        _write_str(fh, stats.lexicon_sha256)
        _write_str(fh, config_sha256)


def load_stats(path) -> CooccurrenceStats:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise StatsFormatError(f"{path}: bad magic, not a PMI1 stats file")
        (alpha,) = struct.unpack("<d", fh.read(8))
        (pair_total,) = struct.unpack("<Q", fh.read(8))
        stats = CooccurrenceStats(smoothing_alpha=alpha, pair_total=pair_total)
        stats.query_count = Counter(dict(_read_table(fh)))
        stats.reply_count = Counter(dict(_read_table(fh)))
        joint = {}
        for key, count in _read_table(fh):
            q, _, r = key.partition("\t")
            joint[(q, r)] = count
        stats.joint_count = Counter(joint)
        stats.lexicon_sha256 = _read_str(fh)
        stats.config_sha256 = _read_str(fh)
    return stats
