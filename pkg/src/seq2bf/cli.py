"""Command-line lifecycle: vocab + PMI building, training, generation,
evaluation, a chat REPL, and the HTTP service.

Every run echoes the resolved configuration and seed; `generate` echoes to
stderr because its stdout carries the TSV artifact.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bf, metrics, pmi, seq2seq
from .config import RunConfig
from .corpus import NounLexicon, Vocab, build_vocab, encode_chars, load_pairs
from .server import MODES, respond, serve


def _add_config_flags(parser: argparse.ArgumentParser, names: list[str]) -> None:
    types = {f.name: f.type for f in RunConfig.__dataclass_fields__.values()}
    typemap = {"int": int, "float": float, "str": str}
    for name in names:
        flag = "--" + name.replace("_", "-")
        parser.add_argument(flag, dest=name, type=typemap[types[name]], default=None)


def _resolve_config(args) -> RunConfig:
    base = RunConfig.from_file(args.config) if args.config else RunConfig()
    if getattr(args, "paper_defaults", False):
        base = RunConfig.paper_defaults()
    overrides = {name: getattr(args, name) for name in
                 RunConfig.__dataclass_fields__ if hasattr(args, name)}
    if overrides.get("seed") is None and os.environ.get("SEQ2BF_SEED"):
        overrides["seed"] = int(os.environ["SEQ2BF_SEED"])
    return base.apply_overrides(overrides)


def _echo_config(cfg: RunConfig, stream) -> None:
    for line in cfg.echo_lines():
        print(line, file=stream)
    print(f"seed {cfg.seed}", file=stream)


def _load_queries(path) -> list[list[str]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    return [[w for w in line.split(" ") if w] for line in lines if line]


def cmd_build_vocab(args) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg, sys.stdout)
    pairs, skipped = load_pairs(cfg.corpus)
    vocab = build_vocab(pairs, cfg.vocab_cap)
    vocab.save(cfg.vocab)
    print(f"read {len(pairs)} pairs ({skipped} malformed lines skipped)")
    print(f"wrote vocabulary of {vocab.size} entries to {cfg.vocab}")
    return 0


def cmd_pmi_train(args) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg, sys.stdout)
    pairs, _ = load_pairs(cfg.corpus)
    vocab = Vocab.load(cfg.vocab)
    with open(cfg.lexicon, "r", encoding="utf-8", newline="") as fh:
        raw_terms = [t for t in fh.read().split("\n") if t]
    lexicon, dropped_oov, dropped_rare = NounLexicon.build(
        raw_terms, pairs, vocab, cfg.lexicon_min_count)
    out_lexicon = args.out_lexicon or cfg.lexicon + ".filtered"
    lexicon.save(out_lexicon)
    stats = pmi.accumulate_stats(pairs, lexicon, cfg.smoothing_alpha)
    pmi.save_stats(stats, cfg.stats, config_sha256=cfg.sha256)
    print(f"lexicon: kept {len(lexicon)} terms "
          f"(dropped {dropped_oov} out-of-vocab, {dropped_rare} rare) -> {out_lexicon}")
    print(f"counted {stats.pair_total} pairs -> {cfg.stats}")
    return 0


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg, sys.stdout)
    pairs, _ = load_pairs(cfg.corpus)
    vocab = Vocab.load(cfg.vocab)
    rng = np.random.default_rng(cfg.seed)

    def examples_for(component, source_pairs):
        if component == "backward":
            made = (bf.make_backward_example(p, vocab, rng) for p in source_pairs)
            return [ex.as_training_example() for ex in made if ex is not None]
        return [(encode_chars(p.query_words, vocab), encode_chars(p.reply_words, vocab))
                for p in source_pairs if p.reply_chars]

    train_examples = examples_for(args.component, pairs)
    if cfg.valid_corpus:
        valid_pairs, _ = load_pairs(cfg.valid_corpus)
    else:
        print("no validation corpus given; validating on the training set")
        valid_pairs = pairs
    valid_examples = examples_for(args.component, valid_pairs)

    model = seq2seq.EncoderDecoder.init(vocab.size, cfg.embed_dim, cfg.hidden_dim,
                                        cfg.seed, cfg.init_range)
    train_cfg = seq2seq.TrainConfig(
        epochs=cfg.epochs, batch_size=cfg.batch_size, patience=cfg.patience,
        learning_rate=cfg.learning_rate, decay=cfg.decay, epsilon=cfg.epsilon,
        lr_embed=cfg.lr_embed, clip_norm=cfg.clip_norm, shuffle_seed=cfg.seed,
        valid_max_len=cfg.max_len)
    result = seq2seq.train(model, train_examples, valid_examples, train_cfg)
    seq2seq.save_model(model, cfg.checkpoint, args.component, vocab.sha256,
                       config_sha256=cfg.sha256)
    seq2seq.write_epoch_log(cfg.checkpoint + ".log", result.log)
    print(f"best epoch {result.best_epoch} (valid BLEU-2 {result.best_bleu:.4f}) "
          f"-> {cfg.checkpoint}")
    return 0


def cmd_generate(args) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg, sys.stderr)
    bundle = bf.load_bundle(cfg.bundle)
    queries = _load_queries(args.queries)
    for words in queries:
        body = respond(bundle, cfg, " ".join(words), args.mode)
        keyword = body["keyword"] if body["keyword"] is not None else ""
        start = body["keyword_start"] if body["keyword_start"] is not None else ""
        print(f"{' '.join(words)}\t{body['reply']}\t{keyword}\t{start}")
    return 0


def cmd_eval(args) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg, sys.stdout)

    def read_lines(path):
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return [line for line in fh.read().split("\n") if line]

    candidates = read_lines(args.candidates)
    references = read_lines(args.references)
    pairs, _ = load_pairs(cfg.corpus)
    vocab = Vocab.load(cfg.vocab)
    unigram = metrics.UnigramModel.from_replies(
        (p.reply_chars for p in pairs), vocab.id_to_char[4:], include_unk=True)
    report = metrics.MetricsReport(
        reply_count=len(candidates),
        avg_length=metrics.avg_length(candidates),
        entropy=metrics.entropy(candidates, unigram),
        bleu2=metrics.bleu2_char(candidates, references),
        config_sha256=cfg.sha256,
    )
    if args.out:
        report.save(args.out)
    print(report.table())
    return 0


def cmd_chat(args) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg, sys.stdout)
    bundle = bf.load_bundle(cfg.bundle)
    mode = args.mode
    print(f"mode {mode}; switch with :mode <name>, quit with :quit or EOF")
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line == ":quit":
            break
        if line.startswith(":mode"):
            candidate = line.split(" ", 1)[-1].strip()
            if candidate in MODES:
                mode = candidate
                print(f"mode {mode}")
            else:
                print(f"unknown mode {candidate!r}; choose from {MODES}")
            continue
        body = respond(bundle, cfg, line, mode)
        print(body["reply"])
        if body["keyword"] is not None:
            print(f"  keyword={body['keyword']} at {body['keyword_start']} "
                  f"(pmi {body['pmi_score']:.3f})")
    return 0


def cmd_serve(args) -> int:
    cfg = _resolve_config(args)
    _echo_config(cfg, sys.stdout)
    bundle = bf.load_bundle(cfg.bundle)
    serve(bundle, cfg, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seq2bf",
        description="content-introducing dialogue generation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, names):
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--paper-defaults", action="store_true",
                       help="pin the published hyperparameters (500d, batch 50, ...)")
        p.add_argument("--seed", dest="seed", type=int, default=None)
        _add_config_flags(p, names)

    p = sub.add_parser("build-vocab", help="build the character vocabulary")
    common(p, ["corpus", "vocab", "vocab_cap"])
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("pmi-train", help="count co-occurrence statistics")
    common(p, ["corpus", "vocab", "lexicon", "stats", "smoothing_alpha",
               "lexicon_min_count"])
    p.add_argument("--out-lexicon", default=None,
                   help="where to write the filtered lexicon")
    p.set_defaults(func=cmd_pmi_train)

    p = sub.add_parser("train", help="train one generator")
    p.add_argument("--component", required=True,
                   choices=("baseline", "backward", "forward"))
    common(p, ["corpus", "valid_corpus", "vocab", "checkpoint", "embed_dim",
               "hidden_dim", "epochs", "patience", "batch_size",
               "learning_rate", "lr_embed", "clip_norm", "max_len"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="decode replies for a query file (TSV out)")
    p.add_argument("--mode", required=True, choices=("seq2seq", "seq2bf", "seq2bf-nokw"))
    p.add_argument("--queries", required=True, help="one query per line")
    common(p, ["bundle", "decode_mode", "beam_width", "max_len", "keyword_fallback"])
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="intrinsic metrics for a candidate file")
    p.add_argument("--candidates", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--out", default=None, help="write the key=value report here")
    common(p, ["corpus", "vocab"])
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("chat", help="interactive REPL over a bundle")
    p.add_argument("--mode", default="seq2bf", choices=MODES)
    common(p, ["bundle", "decode_mode", "beam_width", "max_len", "keyword_fallback"])
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("serve", help="HTTP inference service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8040)
    common(p, ["bundle", "decode_mode", "beam_width", "max_len", "keyword_fallback"])
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
