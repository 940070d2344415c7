"""Verifying the hand-written backward pass with finite differences.

Every gradient in this library flows through a small reverse-accumulation
tape. The checker perturbs each parameter entry by +/-h and compares
(L(x+h)-L(x-h))/2h against the tape's gradient; it is also sensitive
enough to catch a deliberately corrupted backward rule.
"""

import numpy as np

from seq2bf import tape as T
from seq2bf.corpus import DialoguePair, build_vocab, pad_batch
from seq2bf.nn import grad_check, gru_step, GruCell
from seq2bf.seq2seq import EncoderDecoder, teacher_forced_loss
from seq2bf.tape import Tensor

# --- a single GRU step -------------------------------------------------------
cell = GruCell.init(input_dim=6, hidden_dim=5, rng_seed=0, init_range=0.5)
x = Tensor(np.random.default_rng(1).uniform(-1, 1, (2, 6)))
h = Tensor(np.random.default_rng(2).uniform(-1, 1, (2, 5)))

err = grad_check(lambda tp: T.sum_all(gru_step(cell, x, h, tp), tp),
                 list(cell.parameters().values()))
print(f"GRU step, all nine tensors:      max relative error {err:.2e}")

# --- a full encoder-decoder loss ----------------------------------------------
vocab = build_vocab([DialoguePair(("abcdefgh",), ("abcdefgh",))], cap=20)
model = EncoderDecoder.init(vocab.size, embed_dim=8, hidden_dim=8, rng_seed=3,
                            init_range=0.5)
batch = pad_batch([[4, 6, 8], [5, 7]], [[6, 7, 8], [9]])

def loss_fn(tp):
    total, _ = teacher_forced_loss(model, batch, tp)
    return total

err = grad_check(loss_fn, list(model.parameters().values()))
print(f"encoder-decoder, every tensor:   max relative error {err:.2e}")

# --- fault injection ------------------------------------------------------------
theta = Tensor(np.ones(4), name="theta", trainable=True)

def broken_sum(tp):
    out = Tensor(theta.values.sum())
    if tp is not None:
        out.attach_grad()
        def backward():
            theta.grad += out.grad * 2.0  # wrong on purpose: should be *1
        tp.record(backward)
    return out

err = grad_check(broken_sum, [theta])
print(f"corrupted backward rule:         max relative error {err:.2e}  "
      "(the checker flags it)")
