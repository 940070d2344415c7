"""Run configuration: paths, model dims, optimizer constants, decoding.

Desk-scale defaults (64d) keep tests fast; --paper-defaults pins the
published constants (500d embeddings and recurrent layers, batch 50,
rmsprop 0.002/0.99/1e-8, init range 0.08, embedding SGD rate 20.0).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields

from .corpus import ConfigError
from .nn import EMBED_LEARNING_RATE


@dataclass
class RunConfig:
    # paths
    corpus: str = ""
    valid_corpus: str = ""
    lexicon: str = ""
    vocab: str = ""
    stats: str = ""
    checkpoint: str = ""
    bundle: str = ""
    # corpus / vocab
    vocab_cap: int = 4000
    lexicon_min_count: int = 1
    smoothing_alpha: float = 1.0
    # model dims (500/500 under --paper-defaults)
    embed_dim: int = 64
    hidden_dim: int = 64
    # optimizer
    learning_rate: float = 0.002
    decay: float = 0.99
    epsilon: float = 1e-8
    batch_size: int = 50
    init_range: float = 0.08
    lr_embed: float = EMBED_LEARNING_RATE
    clip_norm: float = 5.0
    epochs: int = 50
    patience: int = 5
    # decoding
    decode_mode: str = "greedy"
    beam_width: int = 5
    max_len: int = 40
    keyword_fallback: int = 5
    # misc
    seed: int = 0

    def __post_init__(self):
        positive = ("vocab_cap", "embed_dim", "hidden_dim", "learning_rate",
                    "decay", "epsilon", "batch_size", "init_range", "lr_embed",
                    "epochs", "beam_width", "max_len", "keyword_fallback",
                    "lexicon_min_count")
        for name in positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("smoothing_alpha", "clip_norm", "patience"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")

    @classmethod
    def paper_defaults(cls, **overrides) -> "RunConfig":
        values = dict(embed_dim=500, hidden_dim=500, vocab_cap=4000,
                      batch_size=50, learning_rate=0.002, decay=0.99,
                      epsilon=1e-8, init_range=0.08,
                      lr_embed=EMBED_LEARNING_RATE)
        values.update(overrides)
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def apply_overrides(self, overrides: dict) -> "RunConfig":
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig(**data)

    def resolved(self) -> dict:
        return asdict(self)

    @property
    def sha256(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def echo_lines(self) -> list[str]:
        lines = [f"config {k}={v}" for k, v in sorted(self.resolved().items())]
        lines.append(f"config sha256={self.sha256}")
        return lines
