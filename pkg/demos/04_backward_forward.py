"""Content introducing end to end: keyword -> backward half -> forward reply.

The corpus below makes every trigger query ambiguous: one content reply
against two universal "mmmm" replies. A plain left-to-right decoder
therefore collapses to the universal majority. The pipeline instead
predicts a keyword by PMI, decodes the first half of the reply backward
from that keyword (so it may land at the start, middle, or end), re-reverses
it, and lets the forward generator finish. Same checkpoints either way;
only the forced prefix differs.
"""

import numpy as np

from seq2bf import bf
from seq2bf.corpus import DialoguePair, NounLexicon, build_vocab, encode_chars
from seq2bf.pmi import accumulate_stats, predict_keyword
from seq2bf.seq2seq import DecodeConfig, TrainConfig, train

FAMILIES = {
    "storm": ("zv", ("zv", "mm"), 2),      # keyword opens the reply
    "exam": ("xw", ("mm", "xw", "nn"), 4),  # keyword mid-reply
    "photo": ("yu", ("mm", "yu"), 4),       # keyword ends the reply
}
FILLERS = ("fd", "fe", "fg", "fh", "fi", "fj")
UNIVERSAL = ("mm", "mm")

pairs = []
for trigger, (_, reply_words, _) in FAMILIES.items():
    for filler in FILLERS:
        pairs.append(DialoguePair((trigger, filler), reply_words))
        pairs.append(DialoguePair((trigger, filler), UNIVERSAL))
        pairs.append(DialoguePair((trigger, filler), UNIVERSAL))
for i, a in enumerate(FILLERS):
    for b in FILLERS[i + 1:]:
        pairs.append(DialoguePair((a, b), UNIVERSAL))

vocab = build_vocab(pairs, cap=100)
lexicon = NounLexicon(frozenset(kw for kw, _, _ in FAMILIES.values()))
stats = accumulate_stats(pairs, lexicon)
print(f"{len(pairs)} pairs, vocab {vocab.size}, lexicon {sorted(lexicon.terms)}")

# training data: the forward generator is an ordinary query->reply model;
# the backward generator sees reversed reply prefixes, split word first
forward_examples = [(encode_chars(p.query_words, vocab),
                     encode_chars(p.reply_words, vocab)) for p in pairs]
backward_examples = []
for p in pairs:
    reply_ids = encode_chars(p.reply_words, vocab)
    trigger = p.query_words[0]
    keyword_reply = trigger in FAMILIES and p.reply_words != UNIVERSAL
    split = FAMILIES[trigger][2] if keyword_reply else 2
    backward_examples.append((encode_chars(p.query_words, vocab),
                              bf.backward_target(reply_ids, split)))

model = bf.Seq2BF.init(vocab, embed_dim=48, hidden_dim=48, rng_seed=11)
cfg = TrainConfig(epochs=150, batch_size=10, patience=150, lr_embed=0.1,
                  restore_best=False)
print("training backward generator...")
train(model.backward, backward_examples, backward_examples, cfg)
print("training forward generator...")
train(model.forward, forward_examples, forward_examples, cfg)

decode_cfg = DecodeConfig(max_len=24)
print(f"\n{'query':12s} {'baseline':10s} {'no keyword':12s} "
      f"{'with keyword':14s} keyword@position")
for trigger in FAMILIES:
    query = [trigger, "fd"]
    base = bf.reply_seq2seq(model.forward, vocab, query, decode_cfg)
    minus = bf.reply_without_keyword(model, query, decode_cfg)
    plus = bf.reply(model, stats, lexicon, query, decode_cfg)
    print(f"{' '.join(query):12s} {base.reply_chars:10s} "
          f"{minus.reply_chars:12s} {plus.reply_chars:14s} "
          f"{plus.keyword}@{plus.keyword_start}")

print("\nthe baseline and the keywordless ablation fall back to the universal")
print("reply; the forced keyword lands at position 1, 3, and 3 (end).")

query = ["storm", "fe"]
top = predict_keyword(stats, query, lexicon, k=3)
print(f"\nPMI candidates for {' '.join(query)!r}: "
      + ", ".join(f"{p.term} ({p.score:+.2f})" for p in top))

res = bf.reply(model, stats, lexicon, query, decode_cfg)
k = res.keyword_start + len(res.keyword) - 1
print(f"joint log-probability of the remaining words around the split "
      f"(split index {k}): "
      f"{bf.joint_logprob(model, encode_chars(query, vocab), list(res.reply_ids), k):.3f} nats")
