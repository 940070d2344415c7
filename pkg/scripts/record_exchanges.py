"""Record live /v1/chat exchanges for the browser client's replay tests.

Trains the toy pipeline, serves it over a real socket, and captures 50
keyword-mode exchanges plus a few alternate-mode and failure bodies, all
exactly as the service emitted them. Output:
frontend/test/fixtures/exchanges.json
"""

import json
import sys
import threading
from pathlib import Path

import numpy as np
import requests

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import FAMILIES, UNIVERSAL_REPLY, toy_pairs  # noqa: E402

from seq2bf import bf, pmi, seq2seq  # noqa: E402
from seq2bf.config import RunConfig  # noqa: E402
from seq2bf.corpus import NounLexicon, build_vocab, encode_chars  # noqa: E402
from seq2bf.server import make_server  # noqa: E402


def train_pipeline():
    pairs = toy_pairs()
    vocab = build_vocab(pairs, cap=100)
    lexicon = NounLexicon(frozenset(kw for kw, _, _ in FAMILIES.values()))
    stats = pmi.accumulate_stats(pairs, lexicon)
    forward_examples = [(encode_chars(p.query_words, vocab),
                         encode_chars(p.reply_words, vocab)) for p in pairs]
    backward_examples = []
    for p in pairs:
        reply_ids = encode_chars(p.reply_words, vocab)
        trigger = p.query_words[0]
        is_kw = trigger in FAMILIES and p.reply_words != UNIVERSAL_REPLY
        split = FAMILIES[trigger][2] if is_kw else 2
        backward_examples.append((encode_chars(p.query_words, vocab),
                                  bf.backward_target(reply_ids, split)))
    model = bf.Seq2BF.init(vocab, embed_dim=48, hidden_dim=48, rng_seed=11)
    cfg = seq2seq.TrainConfig(epochs=150, batch_size=10, patience=150,
                              lr_embed=0.1, restore_best=False)
    seq2seq.train(model.backward, backward_examples, backward_examples, cfg)
    seq2seq.train(model.forward, forward_examples, forward_examples, cfg)
    return bf.Bundle(vocab, lexicon, stats, model)


def main():
    out_path = Path(__file__).resolve().parent.parent / "frontend" / "test" / \
        "fixtures" / "exchanges.json"
    print("training the toy pipeline...")
    bundle = train_pipeline()
    server = make_server(bundle, RunConfig(max_len=24), host="127.0.0.1", port=0)
    port = server.server_address[1]
    threading.Thread(target=server.serve_forever, daemon=True).start()
    base = f"http://127.0.0.1:{port}"

    rng = np.random.default_rng(77)
    triggers = list(FAMILIES) + ["fd", "fe", "fg"]
    fillers = ["fd", "fe", "fg", "fh", "fi", "fj", "qa", "qb", "qc"]

    exchanges = []
    for _ in range(50):
        words = [str(rng.choice(triggers))] + \
            [str(w) for w in rng.choice(fillers, size=rng.integers(1, 3))]
        request = {"query": " ".join(words), "mode": "seq2bf"}
        resp = requests.post(base + "/v1/chat", json=request, timeout=10)
        exchanges.append({"request": request, "status": resp.status_code,
                          "body": resp.json()})

    extras = []
    for request in ({"query": "qa fd", "mode": "seq2bf-nokw"},
                    {"query": "qb fe", "mode": "seq2seq"}):
        resp = requests.post(base + "/v1/chat", json=request, timeout=10)
        extras.append({"request": request, "status": resp.status_code,
                       "body": resp.json()})

    failures = []
    resp = requests.post(base + "/v1/chat",
                         json={"query": "hi", "mode": "telepathy"}, timeout=10)
    failures.append({"request": {"query": "hi", "mode": "telepathy"},
                     "status": resp.status_code, "body": resp.json()})
    resp = requests.post(base + "/v1/chat",
                         json={"query": "x" * 501, "mode": "seq2bf"}, timeout=10)
    failures.append({"request": {"query": "x" * 501, "mode": "seq2bf"},
                     "status": resp.status_code, "body": resp.json()})

    server.shutdown()
    server.server_close()

    payload = {"keyword_exchanges": exchanges, "other_modes": extras,
               "failures": failures}
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(payload, indent=1, ensure_ascii=False) + "\n",
                        encoding="utf-8")
    kws = sum(1 for e in exchanges if e["body"]["keyword"])
    print(f"wrote {len(exchanges)} keyword exchanges ({kws} with keyword), "
          f"{len(extras)} other-mode, {len(failures)} failures -> {out_path}")


if __name__ == "__main__":
    main()
