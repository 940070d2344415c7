"""Intrinsic metrics: length, character entropy, and its decomposition.

Entropy against training-set unigrams measures how much information a
reply carries; universal replies made of common characters score low.
Decomposing keyword characters from the rest shows where the information
lives in content-introduced replies. BLEU-2 is included as the early-stop
utility (two good human replies can share zero bigrams).
"""

from seq2bf.bf import ReplyResult
from seq2bf.metrics import (
    UnigramModel,
    avg_length,
    bleu2_char,
    decomposed_entropy,
    entropy,
)

# training replies: "mm"-style fillers dominate, keyword chars are rare
train_replies = ["mmmm"] * 40 + ["zvmm", "mmxwnn", "mmyu"] * 2
unigram = UnigramModel.from_replies(train_replies, "mnxwyuzv")

universal = ["mmmm", "mmmm", "mmmm"]
content = ["zvmm", "mmxwnn", "mmyu"]

print(f"{'reply set':12s} {'avg length':>10s} {'entropy (bits/char)':>20s}")
for name, replies in (("universal", universal), ("content", content)):
    print(f"{name:12s} {avg_length(replies):10.2f} "
          f"{entropy(replies, unigram):20.3f}")

print("\nthe content replies are not longer, they are richer: rare keyword")
print("characters carry most of the information.\n")

results = [
    ReplyResult("zvmm", (), "zv", 1, 0.0, 0.0, 0.0),
    ReplyResult("mmxwnn", (), "xw", 3, 0.0, 0.0, 0.0),
    ReplyResult("mmyu", (), "yu", 3, 0.0, 0.0, 0.0),
]
kw_bits, rem_bits = decomposed_entropy(results, unigram)
print(f"keyword characters:   {kw_bits:.3f} bits/char")
print(f"remaining characters: {rem_bits:.3f} bits/char")
print("(the keyword half is where the surprise is)\n")

print("BLEU-2 as a utility, not a quality measure:")
print(f"  identical sets:        {bleu2_char(content, content):.3f}")
print(f"  universal vs content:  {bleu2_char(universal, content):.3f}")
print(f"  disjoint bigrams:      {bleu2_char(['abab'], ['cdcd']):.3f}")
