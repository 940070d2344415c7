"""Plain GRU encoder-decoder: encoding, decoding, scoring, training.

The reply distribution factorizes left to right: each step conditions on
the encoded query (decoder initialized from the encoder's final state, no
attention) and the previously fed tokens. Decoding supports a forced
prefix whose tokens are fed while the model's own predictions are ignored;
this is what lets the backward/forward pipeline seed generation.

Used directly as the baseline responder and twice inside the
backward/forward pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import tape as T
from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import BOS, EOS, Batch, ConfigError, iter_batches
from .metrics import bleu2_char
from .nn import (
    EmbeddingTable,
    GruCell,
    NumericalError,
    RmspropState,
    clip_global_norm,
    embedding_sgd_step,
    gru_step,
    init_params,
    rmsprop_step,
)
from .tape import Tape, Tensor

COMPONENTS = ("baseline", "backward", "forward")

Example = tuple[Sequence[int], Sequence[int]]  # (query char ids, target char ids)


class EncoderDecoder:
    """Embedding table (shared by encoder and decoder inputs), one encoder
    GRU, one decoder GRU, and an output projection. Instances never share
    tensors with each other."""

    def __init__(self, embed: EmbeddingTable, enc: GruCell, dec: GruCell,
                 proj_w: Tensor, proj_b: Tensor):
        self.embed = embed
        self.enc = enc
        self.dec = dec
        self.proj_w = proj_w
        self.proj_b = proj_b
        if proj_w.values.shape != (self.vocab_size, self.hidden_dim):
            raise ConfigError("projection shape disagrees with embedding/GRU dims")

    @property
    def vocab_size(self) -> int:
        return self.embed.vocab_size

    @property
    def embed_dim(self) -> int:
        return self.embed.embed_dim

    @property
    def hidden_dim(self) -> int:
        return self.enc.u_r.values.shape[0]

    @property
    def dtype(self):
        return self.embed.matrix.values.dtype

    @classmethod
    def init(cls, vocab_size: int, embed_dim: int, hidden_dim: int, rng_seed: int,
             init_range: float = 0.08, dtype=np.float32) -> "EncoderDecoder":
        shapes: dict[str, tuple[int, ...]] = {"embed.matrix": (vocab_size, embed_dim)}
        for part in ("enc", "dec"):
            for name, shape in GruCell.shapes(embed_dim, hidden_dim).items():
                shapes[f"{part}.{name}"] = shape
        shapes["proj.w"] = (vocab_size, hidden_dim)
        shapes["proj.b"] = (vocab_size,)
        params = init_params(rng_seed, shapes, init_range, dtype)
        return cls._from_params(params)

    @classmethod
    def _from_params(cls, params: dict[str, Tensor]) -> "EncoderDecoder":
        embed = EmbeddingTable(params["embed.matrix"])
        enc = GruCell(**{n: params[f"enc.{n}"] for n in GruCell.FIELDS})
        dec = GruCell(**{n: params[f"dec.{n}"] for n in GruCell.FIELDS})
        return cls(embed, enc, dec, params["proj.w"], params["proj.b"])

    def parameters(self) -> dict[str, Tensor]:
        out = {"embed.matrix": self.embed.matrix}
        for part, cell in (("enc", self.enc), ("dec", self.dec)):
            for name, t in cell.parameters().items():
                out[f"{part}.{name}"] = t
        out["proj.w"] = self.proj_w
        out["proj.b"] = self.proj_b
        return out

    def non_embedding_parameters(self) -> dict[str, Tensor]:
        return {k: v for k, v in self.parameters().items() if k != "embed.matrix"}

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.zero_grad()

    def snapshot(self) -> dict[str, np.ndarray]:
        return {k: p.values.copy() for k, p in self.parameters().items()}

    def restore(self, snapshot: dict[str, np.ndarray]) -> None:
        for k, p in self.parameters().items():
            p.values = snapshot[k].copy()


def save_model(model: EncoderDecoder, path, component: str, vocab_sha256: str,
               config_sha256: str = "") -> None:
    if component not in COMPONENTS:
        raise ConfigError(f"component must be one of {COMPONENTS}, got {component!r}")
    metadata = {
        "component": component,
        "vocab_sha256": vocab_sha256,
        "vocab_size": str(model.vocab_size),
        "embed_dim": str(model.embed_dim),
        "hidden_dim": str(model.hidden_dim),
        "config_sha256": config_sha256,
    }
    save_checkpoint(path, {k: t.values for k, t in model.parameters().items()}, metadata)


def load_model(path) -> tuple[EncoderDecoder, dict[str, str]]:
    tensors, metadata = load_checkpoint(path)
    params = {name: Tensor(values, name=name, trainable=True)
              for name, values in tensors.items()}
    return EncoderDecoder._from_params(params), metadata


@dataclass
class DecodeConfig:
    mode: str = "greedy"  # "greedy" | "beam"
    beam_width: int = 5
    max_len: int = 40  # cap on total surface length, forced prefix included
    forced_prefix: tuple[int, ...] = ()

    def __post_init__(self):
        if self.mode not in ("greedy", "beam"):
            raise ConfigError(f"unknown decode mode {self.mode!r}")
        if self.beam_width < 1:
            raise ConfigError("beam_width must be >= 1")
        if self.max_len < 0:
            raise ConfigError("max_len must be >= 0")


@dataclass(frozen=True)
class Hypothesis:
    """A (partial) decode: surface token ids, their summed log-probability
    in nats (EOS included when finished), and whether EOS was emitted."""

    tokens: tuple[int, ...]
    logprob: float
    finished: bool


def encode_batch(model: EncoderDecoder, query_ids: np.ndarray,
                 lengths: np.ndarray, tape: Tape | None = None) -> Tensor:
    """Run the encoder GRU left to right from the zero state.

    Padded positions are masked so each row's final state is its state at
    its own length; all-PAD rows stay at the zero vector.
    """
    batch, width = query_ids.shape
    h = Tensor(np.zeros((batch, model.hidden_dim), dtype=model.dtype))
    for t in range(width):
        x = model.embed.lookup(query_ids[:, t], tape)
        h_new = gru_step(model.enc, x, h, tape)
        mask = (t < lengths).astype(model.dtype)[:, None]
        h = T.lerp(h_new, h, mask, tape)
    return h


def encode(model: EncoderDecoder, query_ids: Sequence[int]) -> np.ndarray:
    """Final encoder state for one query; the empty query encodes to zeros."""
    if len(query_ids) == 0:
        return np.zeros(model.hidden_dim, dtype=model.dtype)
    ids = np.asarray(query_ids, dtype=np.int64)[None, :]
    lengths = np.array([ids.shape[1]])
    return encode_batch(model, ids, lengths).values[0]


def decode_step(model: EncoderDecoder, prev_token: int,
                state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One decoder step: feed prev_token, return (next-token distribution,
    next state). The first step feeds BOS."""
    x = model.embed.lookup(np.array([prev_token]))
    h = gru_step(model.dec, x, Tensor(state[None, :]))
    logits = h.values @ model.proj_w.values.T + model.proj_b.values
    return T.softmax(logits[0]), h.values[0]


def _force_tokens(model: EncoderDecoder, state: np.ndarray, prev: int,
                  tokens: Sequence[int]) -> tuple[np.ndarray, int, float]:
    """Feed tokens, ignoring the model's own prediction at each step, and
    accumulate their log-probabilities."""
    logprob = 0.0
    with np.errstate(divide="ignore"):
        for tok in tokens:
            probs, state = decode_step(model, prev, state)
            logprob += float(np.log(probs[tok]))
            prev = tok
    return state, prev, logprob


def decode_greedy(model: EncoderDecoder, query_ids: Sequence[int],
                  cfg: DecodeConfig) -> Hypothesis:
    """Argmax decoding until EOS or the length cap; ties break to the
    smallest token id. EOS is excluded from the returned surface."""
    state = encode(model, query_ids)
    tokens = list(cfg.forced_prefix)
    state, prev, logprob = _force_tokens(model, state, BOS, tokens)
    finished = False
    while len(tokens) < cfg.max_len:
        probs, state = decode_step(model, prev, state)
        nxt = int(np.argmax(probs))
        logprob += float(np.log(probs[nxt]))
        if nxt == EOS:
            finished = True
            break
        tokens.append(nxt)
        prev = nxt
    return Hypothesis(tuple(tokens), logprob, finished)


@dataclass
class _BeamItem:
    tokens: tuple[int, ...]
    logprob: float
    state: np.ndarray
    prev: int


def decode_beam(model: EncoderDecoder, query_ids: Sequence[int],
                cfg: DecodeConfig) -> tuple[Hypothesis, list[Hypothesis]]:
    """Length-synchronous beam search over summed log-probabilities.

    Finished hypotheses retire as they emit EOS and compete with the
    surviving frontier at the horizon by total log-probability. Width 1
    reproduces greedy decoding.
    """
    state = encode(model, query_ids)
    prefix = list(cfg.forced_prefix)
    state, prev, logprob = _force_tokens(model, state, BOS, prefix)
    live = [_BeamItem(tuple(prefix), logprob, state, prev)]
    finished: list[Hypothesis] = []
    while live and len(live[0].tokens) < cfg.max_len:
        candidates = []
        for idx, item in enumerate(live):
            probs, new_state = decode_step(model, item.prev, item.state)
            with np.errstate(divide="ignore"):
                logp = np.log(probs)
            for tok in range(len(logp)):
                candidates.append((item.logprob + float(logp[tok]), tok, idx, new_state))
        candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
        next_live = []
        for score, tok, idx, new_state in candidates[: cfg.beam_width]:
            parent = live[idx]
            if tok == EOS:
                finished.append(Hypothesis(parent.tokens, score, True))
            else:
                next_live.append(_BeamItem(parent.tokens + (tok,), score, new_state, tok))
        live = next_live
    finals = finished + [Hypothesis(i.tokens, i.logprob, False) for i in live]
    finals.sort(key=lambda h: (-h.logprob, h.tokens))
    return finals[0], finals


def decode(model: EncoderDecoder, query_ids: Sequence[int], cfg: DecodeConfig) -> Hypothesis:
    if cfg.mode == "beam":
        return decode_beam(model, query_ids, cfg)[0]
    return decode_greedy(model, query_ids, cfg)


def sequence_logprob(model: EncoderDecoder, query_ids: Sequence[int],
                     reply_ids: Sequence[int],
                     return_steps: bool = False):
    """Teacher-forced log-probability of a reply plus its EOS, in nats."""
    if len(reply_ids) == 0:
        raise ValueError("reply must be nonempty")
    state = encode(model, query_ids)
    steps = []
    prev = BOS
    with np.errstate(divide="ignore"):
        for tok in list(reply_ids) + [EOS]:
            probs, state = decode_step(model, prev, state)
            steps.append(float(np.log(probs[tok])))
            prev = tok
    total = float(sum(steps))
    return (total, steps) if return_steps else total


def forced_continuation_logprob(model: EncoderDecoder, query_ids: Sequence[int],
                                forced: Sequence[int],
                                continuation: Sequence[int]) -> float:
    """Log-probability of continuation + EOS given a forced prefix, in nats.

    The forced tokens' own factors are excluded: they are conditioning
    context, not predictions.
    """
    state = encode(model, query_ids)
    state, prev, _ = _force_tokens(model, state, BOS, forced)
    total = 0.0
    with np.errstate(divide="ignore"):
        for tok in list(continuation) + [EOS]:
            probs, state = decode_step(model, prev, state)
            total += float(np.log(probs[tok]))
            prev = tok
    return total


def teacher_forced_loss(model: EncoderDecoder, batch: Batch,
                        tape: Tape | None = None) -> tuple[Tensor, int]:
    """Summed cross-entropy over the batch's valid target positions.

    Returns (loss sum, valid token count); positions past a row's length
    carry zero weight so padding never contributes loss or gradient.
    """
    width = batch.target_ids.shape[1]
    state = encode_batch(model, batch.query_ids, batch.query_lengths, tape)
    prev = np.full(batch.size, BOS, dtype=np.int64)
    total: Tensor | None = None
    for t in range(width):
        x = model.embed.lookup(prev, tape)
        state = gru_step(model.dec, x, state, tape)
        logits = T.linear(state, model.proj_w, model.proj_b, tape)
        weights = (t < batch.target_lengths).astype(model.dtype)
        loss_t, _ = T.softmax_xent(logits, batch.target_ids[:, t], weights, tape)
        total = loss_t if total is None else T.add(total, loss_t, tape)
        prev = batch.target_ids[:, t].astype(np.int64)
    return total, int(batch.target_lengths.sum())


def greedy_decode_batch(model: EncoderDecoder, query_seqs: Sequence[Sequence[int]],
                        max_len: int = 40) -> list[list[int]]:
    """Vectorized greedy decoding with no forced prefix (validation path)."""
    batch = len(query_seqs)
    if batch == 0:
        return []
    lengths = np.array([len(q) for q in query_seqs], dtype=np.int64)
    width = max(1, int(lengths.max()))
    qids = np.zeros((batch, width), dtype=np.int64)
    for i, q in enumerate(query_seqs):
        qids[i, : len(q)] = q
    state = encode_batch(model, qids, lengths).values
    prev = np.full(batch, BOS, dtype=np.int64)
    alive = np.ones(batch, dtype=bool)
    outs: list[list[int]] = [[] for _ in range(batch)]
    for _ in range(max_len):
        x = model.embed.lookup(prev)
        h = gru_step(model.dec, x, Tensor(state))
        logits = h.values @ model.proj_w.values.T + model.proj_b.values
        nxt = logits.argmax(axis=1)
        for i in range(batch):
            if alive[i]:
                if nxt[i] == EOS:
                    alive[i] = False
                else:
                    outs[i].append(int(nxt[i]))
        state = h.values
        prev = nxt
        if not alive.any():
            break
    return outs


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 50
    patience: int = 5
    learning_rate: float = 0.002
    decay: float = 0.99
    epsilon: float = 1e-8
    lr_embed: float = 0.1  # literal constant-derived default is nn.EMBED_LEARNING_RATE
    clip_norm: float = 5.0  # 0 disables clipping
    shuffle_seed: int = 0
    valid_max_len: int = 40
    restore_best: bool = True  # load the best-BLEU weights back at the end


@dataclass
class TrainResult:
    log: list[tuple[int, float, float]]  # (epoch, train_xent, valid_bleu2)
    best_epoch: int
    best_bleu: float


def train(model: EncoderDecoder, train_examples: Sequence[Example],
          valid_examples: Sequence[Example], cfg: TrainConfig) -> TrainResult:
    """Teacher-forced training with rmsprop; embeddings take asynchronous
    SGD on touched rows only.

    After each epoch the validation queries are greedy-decoded and scored
    with corpus character BLEU-2 against their references; the
    best-scoring weights are retained and restored at the end. Stops after
    cfg.patience consecutive epochs without improvement.
    """
    if not train_examples:
        raise ConfigError("training needs at least one example")
    if not valid_examples:
        raise ConfigError("validation set must be nonempty (early stop needs it)")
    optim = RmspropState(cfg.learning_rate, cfg.decay, cfg.epsilon)
    valid_queries = [q for q, _ in valid_examples]
    valid_refs = [list(t) for _, t in valid_examples]
    best_bleu = -1.0
    best_epoch = 0
    best_weights = model.snapshot()
    stale = 0
    log: list[tuple[int, float, float]] = []
    for epoch in range(1, cfg.epochs + 1):
        epoch_loss = 0.0
        epoch_tokens = 0
        batches = iter_batches(train_examples, cfg.batch_size, cfg.shuffle_seed + epoch)
        for batch_index, batch in enumerate(batches):
            run_tape = Tape()
            model.zero_grad()
            model.embed.clear_touched()
            loss_sum, count = teacher_forced_loss(model, batch, run_tape)
            if not np.isfinite(loss_sum.values):
                raise NumericalError(
                    f"non-finite loss in epoch {epoch}, batch {batch_index}"
                )
            mean_loss = T.scale(loss_sum, 1.0 / count, run_tape)
            run_tape.backward(mean_loss)
            if cfg.clip_norm:
                clip_global_norm(list(model.parameters().values()), cfg.clip_norm)
            rmsprop_step(optim, model.non_embedding_parameters())
            embedding_sgd_step(model.embed, cfg.lr_embed)
            epoch_loss += float(loss_sum.values)
            epoch_tokens += count
        decoded = greedy_decode_batch(model, valid_queries, cfg.valid_max_len)
        bleu = bleu2_char(decoded, valid_refs)
        log.append((epoch, epoch_loss / epoch_tokens, bleu))
        if bleu > best_bleu:
            best_bleu = bleu
            best_epoch = epoch
            best_weights = model.snapshot()
            stale = 0
        else:
            stale += 1
        if stale >= cfg.patience:
            break
    if cfg.restore_best:
        model.restore(best_weights)
    return TrainResult(log, best_epoch, best_bleu)


def write_epoch_log(path, log: Sequence[tuple[int, float, float]]) -> None:
    """UTF-8 lines `epoch<TAB>train_xent<TAB>valid_bleu2`."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for epoch, xent, bleu in log:
            fh.write(f"{epoch}\t{xent:.6f}\t{bleu:.6f}\n")
