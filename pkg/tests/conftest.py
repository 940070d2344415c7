"""Shared fixtures: an engineered toy corpus and trained models.

The corpus has three keyword families placing the keyword at the start,
middle, and end of the reply, plus universal keyword-free replies made of
common characters. Every trigger query is deliberately ambiguous: one
keyword reply against two universal replies, so a free decode collapses to
the universal majority while a forced keyword steers onto the content
branch. Rare keyword characters vs. common filler characters give the
entropy decomposition something to measure.
"""

import pytest

from seq2bf import bf, pmi, seq2seq
from seq2bf.corpus import DialoguePair, NounLexicon, build_vocab, encode_chars

# trigger word -> (keyword term, reply words, 1-based split char index at
# the keyword's last character)
FAMILIES = {
    "qa": ("zv", ("zv", "mm"), 2),  # keyword at reply start
    "qb": ("xw", ("mm", "xw", "nn"), 4),  # keyword mid-reply
    "qc": ("yu", ("mm", "yu"), 4),  # keyword at reply end
}
FILLERS = ("fd", "fe", "fg", "fh", "fi", "fj")
UNIVERSAL_REPLY = ("mm", "mm")


def toy_pairs() -> list[DialoguePair]:
    pairs = []
    for trigger, (_, reply_words, _) in FAMILIES.items():
        for filler in FILLERS:
            query = (trigger, filler)
            pairs.append(DialoguePair(query, reply_words))
            # the same query answered twice with the universal reply: the
            # majority target for a free decode
            pairs.append(DialoguePair(query, UNIVERSAL_REPLY))
            pairs.append(DialoguePair(query, UNIVERSAL_REPLY))
    for i, a in enumerate(FILLERS):
        for b in FILLERS[i + 1 :]:
            pairs.append(DialoguePair((a, b), UNIVERSAL_REPLY))
    return pairs


@pytest.fixture(scope="session")
def toy_corpus():
    pairs = toy_pairs()
    vocab = build_vocab(pairs, cap=100)
    lexicon = NounLexicon(frozenset(kw for kw, _, _ in FAMILIES.values()))
    stats = pmi.accumulate_stats(pairs, lexicon)
    return {"pairs": pairs, "vocab": vocab, "lexicon": lexicon, "stats": stats}


def _train(model, examples, seed):
    # references are ambiguous by design, so BLEU-driven early stop and
    # best-checkpoint restoration would pick near-untrained weights
    cfg = seq2seq.TrainConfig(epochs=150, batch_size=10, patience=150,
                              lr_embed=0.1, shuffle_seed=seed,
                              restore_best=False)
    return seq2seq.train(model, examples, examples, cfg)


@pytest.fixture(scope="session")
def trained(toy_corpus):
    """Backward and forward generators trained on the toy corpus.

    The backward generator trains on gold splits for the keyword replies
    (split at the keyword's last character) and on a fixed short half for
    the universal replies. The corpus is ambiguous by design, so BLEU
    cannot reach 1; the fixture instead asserts the behaviors the tests
    rely on: forced keywords steer onto the content branch, free decodes
    collapse to the universal reply.
    """
    vocab = toy_corpus["vocab"]
    pairs = toy_corpus["pairs"]

    forward_examples = [
        (encode_chars(p.query_words, vocab), encode_chars(p.reply_words, vocab))
        for p in pairs
    ]
    backward_examples = []
    for p in pairs:
        reply_ids = encode_chars(p.reply_words, vocab)
        trigger = p.query_words[0]
        is_keyword_reply = trigger in FAMILIES and p.reply_words != UNIVERSAL_REPLY
        split = FAMILIES[trigger][2] if is_keyword_reply else 2
        target = bf.backward_target(reply_ids, split)
        backward_examples.append(
            (encode_chars(p.query_words, vocab), target)
        )

    model = bf.Seq2BF.init(vocab, embed_dim=48, hidden_dim=48, rng_seed=11)
    _train(model.backward, backward_examples, seed=21)
    _train(model.forward, forward_examples, seed=22)

    cfg = seq2seq.DecodeConfig(max_len=24)
    probe = bf.reply(model, toy_corpus["stats"], toy_corpus["lexicon"],
                     ["qb", "fd"], cfg)
    assert probe.reply_chars == "mmxwnn", "forced keyword branch not learned"
    free = bf.reply_without_keyword(model, ["qb", "fd"], cfg)
    assert "xw" not in free.reply_chars, "free decode should stay universal"
    return model


@pytest.fixture(scope="session")
def bundle_dir(tmp_path_factory, toy_corpus, trained):
    """A complete on-disk bundle: vocab, lexicon, stats, checkpoints, manifest."""
    root = tmp_path_factory.mktemp("bundle")
    vocab = toy_corpus["vocab"]
    vocab.save(root / "vocab.txt")
    toy_corpus["lexicon"].save(root / "lexicon.txt")
    pmi.save_stats(toy_corpus["stats"], root / "stats.bin")
    seq2seq.save_model(trained.backward, root / "backward.s2bf", "backward", vocab.sha256)
    seq2seq.save_model(trained.forward, root / "forward.s2bf", "forward", vocab.sha256)
    bf.write_manifest(root / "bundle.manifest", {
        "vocab": "vocab.txt",
        "lexicon": "lexicon.txt",
        "stats": "stats.bin",
        "backward_checkpoint": "backward.s2bf",
        "forward_checkpoint": "forward.s2bf",
    })
    with open(root / "corpus.tsv", "w", encoding="utf-8") as fh:
        for p in toy_corpus["pairs"]:
            fh.write(" ".join(p.query_words) + "\t" + " ".join(p.reply_words) + "\n")
    return root
