"""Backward/forward reply generation around a predicted keyword.

Two independently parameterized encoder-decoders. The backward generator
is trained on reversed reply prefixes (split character first), so at
inference the keyword's characters, fed in reversed order, occupy exactly
the slots it saw in training; its output, reversed again, is the first
half of the reply. The forward generator is an ordinary query-to-reply
model whose decoding is seeded with that first half. The keyword therefore
lands verbatim in the reply, at whatever position the backward generator
chooses for it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .corpus import (
    EOS,
    UNK,
    ConfigError,
    DialoguePair,
    NounLexicon,
    Vocab,
    encode_chars,
)
from .pmi import CooccurrenceStats, KeywordPrediction, load_stats, predict_keyword
from .seq2seq import (
    DecodeConfig,
    EncoderDecoder,
    decode,
    forced_continuation_logprob,
    load_model,
)


class KeywordError(ValueError):
    """Raised when a keyword cannot seed generation (out-of-vocab chars)."""


@dataclass(frozen=True)
class BackwardExample:
    """Training example for the backward generator.

    target_ids holds the reply prefix up to the split index, reversed
    (split character first), followed by EOS.
    """

    query_ids: tuple[int, ...]
    target_ids: tuple[int, ...]

    def as_training_example(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        # the batcher appends EOS itself
        return self.query_ids, self.target_ids[:-1]


def backward_target(reply_ids: Sequence[int], split_index: int) -> list[int]:
    """Reversed reply prefix for a 1-based split index: r_k, ..., r_1."""
    if not 1 <= split_index <= len(reply_ids):
        raise ValueError(f"split index {split_index} outside reply of "
                         f"length {len(reply_ids)}")
    return list(reversed(reply_ids[:split_index]))


def make_backward_example(pair: DialoguePair, vocab: Vocab,
                          rng: np.random.Generator) -> BackwardExample | None:
    """Sample a split position uniformly over reply characters and build
    the reversed-prefix example. Empty replies yield None (stream filter).

    Uniform sampling keeps full reversals rare, so the generator does not
    learn to reproduce entire replies backwards.
    """
    reply_ids = encode_chars(pair.reply_words, vocab)
    if not reply_ids:
        return None
    split = int(rng.integers(1, len(reply_ids) + 1))
    target = backward_target(reply_ids, split) + [EOS]
    return BackwardExample(tuple(encode_chars(pair.query_words, vocab)), tuple(target))


@dataclass
class Seq2BF:
    """The backward and forward generators plus their shared vocabulary.

    The two models never share tensors; both use the same Vocab.
    """

    backward: EncoderDecoder
    forward: EncoderDecoder
    vocab: Vocab

    @classmethod
    def init(cls, vocab: Vocab, embed_dim: int, hidden_dim: int,
             rng_seed: int, **kwargs) -> "Seq2BF":
        backward = EncoderDecoder.init(vocab.size, embed_dim, hidden_dim,
                                       rng_seed, **kwargs)
        forward = EncoderDecoder.init(vocab.size, embed_dim, hidden_dim,
                                      rng_seed + 1, **kwargs)
        return cls(backward, forward, vocab)


@dataclass
class ReplyResult:
    """One generated reply with its keyword anchor and stage scores.

    keyword_start is the 1-based character index of the keyword inside
    reply_chars; keyword fields are None when generation ran without a
    keyword (ablation mode or degraded fallback). Stage log-probabilities
    are the decoders' accumulated hypothesis scores (forced tokens
    included).
    """

    reply_chars: str
    reply_ids: tuple[int, ...]
    keyword: str | None
    keyword_start: int | None
    backward_logprob: float | None
    forward_logprob: float
    pmi_score: float | None
    no_keyword: bool = False  # True when the pipeline degraded to a plain forward decode


def generate_backward(model: EncoderDecoder, query_ids: Sequence[int],
                      keyword_ids: Sequence[int] | None,
                      cfg: DecodeConfig):
    """Decode the reply's first half, last character first.

    The keyword's characters are forced in reversed order so that after the
    final re-reversal they read left to right; a multi-character term is
    simply a longer forced block. keyword_ids=None decodes freely from BOS
    (the keyword constraint slacked). Returns (first_half_ids, hypothesis).
    """
    if keyword_ids is not None:
        if len(keyword_ids) == 0:
            raise KeywordError("keyword must have at least one character")
        if any(i == UNK for i in keyword_ids):
            raise KeywordError("keyword contains out-of-vocab characters")
        prefix = tuple(reversed(keyword_ids))
    else:
        prefix = ()
    hyp = decode(model, query_ids, replace(cfg, forced_prefix=prefix))
    return list(reversed(hyp.tokens)), hyp


def generate_forward(model: EncoderDecoder, query_ids: Sequence[int],
                     first_half: Sequence[int], cfg: DecodeConfig):
    """Decode the full reply given its first half in normal order.

    The output always begins with first_half verbatim; the continuation may
    be empty. Returns (reply_ids, hypothesis).
    """
    if len(first_half) == 0:
        raise ValueError("forward generation needs a nonempty first half")
    hyp = decode(model, query_ids, replace(cfg, forced_prefix=tuple(first_half)))
    return list(hyp.tokens), hyp


def reply(s2bf: Seq2BF, stats: CooccurrenceStats, lexicon: NounLexicon,
          query_words: Sequence[str], cfg: DecodeConfig = DecodeConfig(),
          candidates: list[KeywordPrediction] | None = None,
          fallback_depth: int = 5) -> ReplyResult:
    """Full pipeline: predict the keyword, decode backward, complete forward.

    Unusable keywords (out-of-vocab characters) fall back to the next PMI
    candidate; if every candidate is unusable the result degrades to a
    plain forward decode with no keyword.
    """
    query_ids = encode_chars(query_words, s2bf.vocab)
    if candidates is None:
        candidates = predict_keyword(stats, query_words, lexicon, k=fallback_depth)
    for cand in candidates:
        keyword_ids = encode_chars([cand.term], s2bf.vocab)
        try:
            first_half, bw_hyp = generate_backward(
                s2bf.backward, query_ids, keyword_ids, cfg)
        except KeywordError:
            continue
        reply_ids, fw_hyp = generate_forward(
            s2bf.forward, query_ids, first_half, cfg)
        start = len(first_half) - len(keyword_ids) + 1
        return ReplyResult(
            reply_chars=s2bf.vocab.decode(reply_ids),
            reply_ids=tuple(reply_ids),
            keyword=cand.term,
            keyword_start=start,
            backward_logprob=bw_hyp.logprob,
            forward_logprob=fw_hyp.logprob,
            pmi_score=cand.score,
        )
    result = reply_seq2seq(s2bf.forward, s2bf.vocab, query_words, cfg)
    result.no_keyword = True
    return result


def reply_without_keyword(s2bf: Seq2BF, query_words: Sequence[str],
                          cfg: DecodeConfig = DecodeConfig()) -> ReplyResult:
    """Ablation: the backward generator runs free (no keyword forced), the
    forward generator completes as usual. Same checkpoints, no keyword."""
    query_ids = encode_chars(query_words, s2bf.vocab)
    first_half, bw_hyp = generate_backward(s2bf.backward, query_ids, None, cfg)
    if first_half:
        reply_ids, fw_hyp = generate_forward(s2bf.forward, query_ids, first_half, cfg)
    else:
        # backward emitted EOS immediately; nothing to seed with
        hyp = decode(s2bf.forward, query_ids, replace(cfg, forced_prefix=()))
        reply_ids, fw_hyp = list(hyp.tokens), hyp
    return ReplyResult(
        reply_chars=s2bf.vocab.decode(reply_ids),
        reply_ids=tuple(reply_ids),
        keyword=None,
        keyword_start=None,
        backward_logprob=bw_hyp.logprob,
        forward_logprob=fw_hyp.logprob,
        pmi_score=None,
    )


def reply_seq2seq(model: EncoderDecoder, vocab: Vocab,
                  query_words: Sequence[str],
                  cfg: DecodeConfig = DecodeConfig()) -> ReplyResult:
    """Plain left-to-right decoding (the baseline responder)."""
    query_ids = encode_chars(query_words, vocab)
    hyp = decode(model, query_ids, replace(cfg, forced_prefix=()))
    return ReplyResult(
        reply_chars=vocab.decode(hyp.tokens),
        reply_ids=tuple(hyp.tokens),
        keyword=None,
        keyword_start=None,
        backward_logprob=None,
        forward_logprob=hyp.logprob,
        pmi_score=None,
    )


def joint_logprob(s2bf: Seq2BF, query_ids: Sequence[int],
                  reply_ids: Sequence[int], split_index: int) -> float:
    """Joint log-probability of the words around the split character.

    Backward factors: r_{k-1}..r_1 plus EOS, conditioned on the forced
    split character. Forward factors: r_{k+1}..r_m plus EOS, conditioned on
    the forced first half. The forced factors themselves are excluded.
    """
    m = len(reply_ids)
    if not 1 <= split_index <= m:
        raise ValueError(f"split index {split_index} outside reply of length {m}")
    k = split_index
    backward_part = forced_continuation_logprob(
        s2bf.backward, query_ids,
        forced=[reply_ids[k - 1]],
        continuation=list(reversed(reply_ids[: k - 1])),
    )
    forward_part = forced_continuation_logprob(
        s2bf.forward, query_ids,
        forced=list(reply_ids[:k]),
        continuation=list(reply_ids[k:]),
    )
    return backward_part + forward_part


# --- bundle manifest -------------------------------------------------------

MANIFEST_KEYS = ("vocab", "lexicon", "stats", "backward_checkpoint",
                 "forward_checkpoint")


@dataclass
class Bundle:
    vocab: Vocab
    lexicon: NounLexicon
    stats: CooccurrenceStats
    s2bf: Seq2BF
    baseline: EncoderDecoder | None = None
    lexicon_dropped: int = 0


def write_manifest(path, entries: dict[str, str]) -> None:
    """UTF-8 key=value lines naming the bundle's component files."""
    missing = [k for k in MANIFEST_KEYS if k not in entries]
    if missing:
        raise ConfigError(f"manifest is missing entries: {missing}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={value}\n")


def read_manifest(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        entries = {}
        for line in fh.read().split("\n"):
            if line:
                key, _, value = line.partition("=")
                entries[key] = value
    return entries


def _checked_load(path, vocab: Vocab, expected_component: str) -> EncoderDecoder:
    model, metadata = load_model(path)
    if metadata.get("component") != expected_component:
        raise ConfigError(
            f"{path}: checkpoint component {metadata.get('component')!r}, "
            f"expected {expected_component!r}")
    recorded = metadata.get("vocab_sha256", "")
    if recorded and recorded != vocab.sha256:
        raise ConfigError(f"{path}: checkpoint was trained with a different "
                          "vocabulary (hash mismatch)")
    return model


def load_bundle(manifest_path) -> Bundle:
    """Load every bundle component, verifying checkpoint vocab hashes."""
    entries = read_manifest(manifest_path)
    missing = [k for k in MANIFEST_KEYS if k not in entries]
    if missing:
        raise ConfigError(f"{manifest_path}: manifest is missing {missing}")
    base = os.path.dirname(os.path.abspath(manifest_path))
    resolve = lambda rel: os.path.join(base, rel)
    vocab = Vocab.load(resolve(entries["vocab"]))
    lexicon, dropped = NounLexicon.load(resolve(entries["lexicon"]), vocab)
    stats = load_stats(resolve(entries["stats"]))
    backward = _checked_load(resolve(entries["backward_checkpoint"]), vocab, "backward")
    forward = _checked_load(resolve(entries["forward_checkpoint"]), vocab, "forward")
    baseline = None
    if entries.get("baseline_checkpoint"):
        baseline = _checked_load(resolve(entries["baseline_checkpoint"]), vocab, "baseline")
    return Bundle(vocab, lexicon, stats, Seq2BF(backward, forward, vocab),
                  baseline, dropped)
