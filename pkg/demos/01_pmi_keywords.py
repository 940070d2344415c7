"""Keyword prediction with pointwise mutual information.

A reply keyword should be the noun most mutually informative with the
query, not the most frequent word. PMI divides by the candidate's prior,
so ubiquitous words lose to specific ones. This script counts a tiny
weather corpus and walks through scoring, ranking, and the common-word
penalty.
"""

import math

from seq2bf.corpus import DialoguePair, NounLexicon
from seq2bf.pmi import accumulate_stats, pmi_score, predict_keyword, query_pmi

pairs = [
    DialoguePair(("rain", "today"), ("take", "an", "umbrella")),
    DialoguePair(("rain", "again"), ("nice", "umbrella")),
    DialoguePair(("rain", "heavy"), ("wear", "boots")),
    DialoguePair(("sun", "today"), ("wear", "a", "hat")),
    DialoguePair(("sun", "beach"), ("sunscreen", "and", "a", "hat")),
    DialoguePair(("snow", "today"), ("snowman", "time")),
    DialoguePair(("exam", "tomorrow"), ("good", "luck", "with", "revision")),
]

lexicon = NounLexicon(frozenset({"umbrella", "boots", "hat", "snowman", "revision"}))
stats = accumulate_stats(pairs, lexicon, smoothing_alpha=1.0)

print(f"counted {stats.pair_total} pairs, "
      f"{stats.query_vocab_size} distinct query words\n")

print("pairwise PMI against the lexicon (nats):")
for word in ("rain", "sun", "today"):
    row = {term: pmi_score(stats, word, term) for term in sorted(lexicon.terms)}
    cells = "  ".join(f"{t}={v:+.3f}" for t, v in row.items())
    print(f"  {word:6s} {cells}")

print("\n'today' appears with rain, sun, and snow alike, so its PMI is flat;")
print("'rain' points sharply at umbrella/boots.\n")

query = ["rain", "today"]
print(f"query: {' '.join(query)}")
for rank, pred in enumerate(predict_keyword(stats, query, lexicon, k=3), 1):
    contributions = ", ".join(f"{w}: {c:+.3f}" for w, c in pred.per_word)
    print(f"  #{rank} {pred.term:9s} score {pred.score:+.3f}  ({contributions})")

# the whole-query score is just the sum of word-level PMI (independence
# assumptions make it additive)
top = predict_keyword(stats, query, lexicon, k=1)[0]
assert math.isclose(top.score, query_pmi(stats, query, top.term), rel_tol=1e-12)
print(f"\nargmax keyword for the reply: {top.term!r}")
