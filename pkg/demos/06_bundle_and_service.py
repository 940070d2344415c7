"""Packaging a trained pipeline into a bundle and serving it over HTTP.

A bundle manifest names the vocab, lexicon, PMI stats, and the two
checkpoints; loaders verify that each checkpoint was trained with the
same vocabulary. The HTTP service exposes /v1/health and /v1/chat and is
what the browser chat client talks to. This script builds a tiny bundle
in a temp directory, starts the service in-process, and exercises it.
"""

import json
import tempfile
import threading
import urllib.request
from pathlib import Path

from seq2bf import bf
from seq2bf.config import RunConfig
from seq2bf.corpus import DialoguePair, NounLexicon, build_vocab, encode_chars
from seq2bf.pmi import accumulate_stats, save_stats
from seq2bf.seq2seq import TrainConfig, save_model, train
from seq2bf.server import make_server

# --- train a miniature pipeline (same corpus shape as demo 04) ----------------
FAMILIES = {"storm": ("zv", ("zv", "mm"), 2), "exam": ("xw", ("mm", "xw", "nn"), 4)}
FILLERS = ("fd", "fe", "fg", "fh")
pairs = []
for trigger, (_, reply_words, _) in FAMILIES.items():
    for filler in FILLERS:
        pairs.append(DialoguePair((trigger, filler), reply_words))
        pairs.append(DialoguePair((trigger, filler), ("mm", "mm")))
        pairs.append(DialoguePair((trigger, filler), ("mm", "mm")))
for i, a in enumerate(FILLERS):
    for b in FILLERS[i + 1:]:
        pairs.append(DialoguePair((a, b), ("mm", "mm")))

vocab = build_vocab(pairs, cap=100)
lexicon = NounLexicon(frozenset(kw for kw, _, _ in FAMILIES.values()))
stats = accumulate_stats(pairs, lexicon)

model = bf.Seq2BF.init(vocab, embed_dim=48, hidden_dim=48, rng_seed=11)
cfg = TrainConfig(epochs=120, batch_size=10, patience=120, lr_embed=0.1,
                  restore_best=False)
forward_examples = [(encode_chars(p.query_words, vocab),
                     encode_chars(p.reply_words, vocab)) for p in pairs]
backward_examples = []
for p in pairs:
    reply_ids = encode_chars(p.reply_words, vocab)
    trigger = p.query_words[0]
    is_kw = trigger in FAMILIES and p.reply_words != ("mm", "mm")
    split = FAMILIES[trigger][2] if is_kw else 2
    backward_examples.append((encode_chars(p.query_words, vocab),
                              bf.backward_target(reply_ids, split)))
print("training the two generators...")
train(model.backward, backward_examples, backward_examples, cfg)
train(model.forward, forward_examples, forward_examples, cfg)

# --- write the bundle -----------------------------------------------------------
root = Path(tempfile.mkdtemp(prefix="seq2bf_bundle_"))
vocab.save(root / "vocab.txt")
lexicon.save(root / "lexicon.txt")
save_stats(stats, root / "stats.bin")
save_model(model.backward, root / "backward.s2bf", "backward", vocab.sha256)
save_model(model.forward, root / "forward.s2bf", "forward", vocab.sha256)
bf.write_manifest(root / "bundle.manifest", {
    "vocab": "vocab.txt",
    "lexicon": "lexicon.txt",
    "stats": "stats.bin",
    "backward_checkpoint": "backward.s2bf",
    "forward_checkpoint": "forward.s2bf",
})
print(f"bundle written to {root}")

# --- serve and query --------------------------------------------------------------
bundle = bf.load_bundle(root / "bundle.manifest")
server = make_server(bundle, RunConfig(max_len=24), host="127.0.0.1", port=0)
port = server.server_address[1]
threading.Thread(target=server.serve_forever, daemon=True).start()
print(f"service listening on 127.0.0.1:{port}\n")

def get(path):
    with urllib.request.urlopen(f"http://127.0.0.1:{port}{path}") as resp:
        return json.loads(resp.read())

def post(path, payload):
    req = urllib.request.Request(
        f"http://127.0.0.1:{port}{path}",
        data=json.dumps(payload).encode("utf-8"),
        headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())

print("GET /v1/health ->", get("/v1/health"))
for mode in ("seq2seq", "seq2bf-nokw", "seq2bf"):
    body = post("/v1/chat", {"query": "storm fd", "mode": mode})
    keyword = f"keyword={body['keyword']}@{body['keyword_start']}" \
        if body["keyword"] else "no keyword"
    print(f"POST /v1/chat mode={mode:12s} reply={body['reply']!r:10s} {keyword}")

body = post("/v1/chat", {"query": "exam fe", "mode": "seq2bf"})
print(f"\ncandidates for 'exam fe': "
      + ", ".join(f"{c['term']} ({c['score']:+.2f})" for c in body["candidates"]))

server.shutdown()
server.server_close()
print("service stopped")
