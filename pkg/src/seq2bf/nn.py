"""GRU cell, parameter init, optimizers, and a finite-difference checker.

The update-gate recurrence uses its own matrix U_z (separate from the reset
gate's U_r), the standard formulation. All trainable state lives in
:class:`tape.Tensor` objects so one forward/backward implementation serves
training, inference, and gradient checking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from . import tape as T
from .tape import Tape, Tensor

INIT_RANGE = 0.08  # uniform initialization bound for every parameter
LEARNING_RATE = 0.002
DECAY = 0.99
EPSILON = 1e-8
# Literal reading of "embedding SGD with the learning rate divided by
# sqrt(epsilon)"; aggressive, so callers usually override it.
EMBED_LEARNING_RATE = LEARNING_RATE / np.sqrt(EPSILON)


class NumericalError(RuntimeError):
    """Raised when a loss or gradient goes non-finite."""


def init_params(
    rng_seed: int,
    shapes: Mapping[str, tuple[int, ...]],
    init_range: float = INIT_RANGE,
    dtype=np.float32,
) -> dict[str, Tensor]:
    """Trainable tensors with entries i.i.d. uniform on [-init_range, init_range].

    Deterministic per seed: same seed gives bitwise-identical parameters.
    """
    rng = np.random.default_rng(rng_seed)
    params = {}
    for name, shape in shapes.items():
        values = rng.uniform(-init_range, init_range, size=shape).astype(dtype)
        params[name] = Tensor(values, name=name, trainable=True)
    return params


@dataclass
class GruCell:
    """Gated recurrent unit: three input maps, three recurrent maps, biases.

    r = sigmoid(W_r x + U_r h + b_r)        reset gate
    z = sigmoid(W_z x + U_z h + b_z)        update gate
    hc = tanh(W_h x + U_h (r*h) + b_h)      candidate state
    h' = (1-z)*h + z*hc
    """

    w_r: Tensor
    u_r: Tensor
    b_r: Tensor
    w_z: Tensor
    u_z: Tensor
    b_z: Tensor
    w_h: Tensor
    u_h: Tensor
    b_h: Tensor

    FIELDS = ("w_r", "u_r", "b_r", "w_z", "u_z", "b_z", "w_h", "u_h", "b_h")

    @classmethod
    def shapes(cls, input_dim: int, hidden_dim: int) -> dict[str, tuple[int, ...]]:
        out = {}
        for gate in "rzh":
            out[f"w_{gate}"] = (hidden_dim, input_dim)
            out[f"u_{gate}"] = (hidden_dim, hidden_dim)
            out[f"b_{gate}"] = (hidden_dim,)
        return out

    @classmethod
    def init(cls, input_dim: int, hidden_dim: int, rng_seed: int,
             init_range: float = INIT_RANGE, dtype=np.float32) -> "GruCell":
        return cls(**init_params(rng_seed, cls.shapes(input_dim, hidden_dim),
                                 init_range, dtype))

    def parameters(self) -> dict[str, Tensor]:
        return {name: getattr(self, name) for name in self.FIELDS}


def gru_step(cell: GruCell, x: Tensor, h_prev: Tensor, tape: Tape | None = None) -> Tensor:
    """One GRU update over a batch: x (B,E), h_prev (B,H) -> (B,H)."""
    if x.values.ndim != 2 or h_prev.values.ndim != 2:
        raise ValueError("gru_step expects (batch, dim) tensors")
    if x.values.shape[0] != h_prev.values.shape[0]:
        raise ValueError("gru_step batch sizes disagree")
    r = T.sigmoid(T.add(T.linear(x, cell.w_r, cell.b_r, tape),
                        T.linear(h_prev, cell.u_r, None, tape), tape), tape)
    z = T.sigmoid(T.add(T.linear(x, cell.w_z, cell.b_z, tape),
                        T.linear(h_prev, cell.u_z, None, tape), tape), tape)
    h_cand = T.tanh(T.add(T.linear(x, cell.w_h, cell.b_h, tape),
                          T.linear(T.mul(r, h_prev, tape), cell.u_h, None, tape),
                          tape), tape)
    return T.add(T.mul(T.one_minus(z, tape), h_prev, tape),
                 T.mul(z, h_cand, tape), tape)


def softmax_xent(logits: np.ndarray, target: int) -> tuple[float, np.ndarray]:
    """Stabilized cross-entropy of one logit vector against a class id.

    Returns (loss, probability vector); loss = -log p[target].
    """
    logits = np.asarray(logits)
    if not 0 <= target < logits.shape[-1]:
        raise IndexError(f"target {target} out of range for {logits.shape[-1]} classes")
    probs = T.softmax(logits)
    return float(-np.log(probs[target])), probs


class EmbeddingTable:
    """Vocab x embed matrix with per-batch touched-row tracking.

    Embedding rows are sparse in use, so only rows gathered since the last
    clear are updated by the asynchronous SGD step.
    """

    def __init__(self, matrix: Tensor):
        self.matrix = matrix
        self.touched: set[int] = set()

    @classmethod
    def init(cls, vocab_size: int, embed_dim: int, rng_seed: int,
             init_range: float = INIT_RANGE, dtype=np.float32) -> "EmbeddingTable":
        (matrix,) = init_params(
            rng_seed, {"embed": (vocab_size, embed_dim)}, init_range, dtype
        ).values()
        return cls(matrix)

    @property
    def vocab_size(self) -> int:
        return self.matrix.values.shape[0]

    @property
    def embed_dim(self) -> int:
        return self.matrix.values.shape[1]

    def lookup(self, ids: np.ndarray, tape: Tape | None = None) -> Tensor:
        ids = np.asarray(ids)
        if ids.max(initial=0) >= self.vocab_size:
            raise IndexError("token id out of range for embedding table")
        if tape is not None:
            self.touched.update(int(i) for i in np.unique(ids))
        return T.gather(self.matrix, ids, tape)

    def clear_touched(self) -> None:
        self.touched.clear()


@dataclass
class RmspropState:
    """Running mean of squared gradients per parameter, plus constants."""

    learning_rate: float = LEARNING_RATE
    decay: float = DECAY
    epsilon: float = EPSILON
    cache: dict = None

    def __post_init__(self):
        if self.cache is None:
            self.cache = {}


def rmsprop_step(state: RmspropState, params: Mapping[str, Tensor]) -> None:
    """cache <- decay*cache + (1-decay)*g^2; p <- p - lr*g/sqrt(cache+eps).

    Arithmetic runs in float64 and is cast back to each parameter's dtype.
    """
    for name, p in params.items():
        g = p.grad.astype(np.float64)
        cache = state.cache.get(name)
        if cache is None:
            cache = np.zeros(p.values.shape, dtype=np.float64)
        cache = state.decay * cache + (1.0 - state.decay) * g * g
        state.cache[name] = cache
        step = state.learning_rate * g / np.sqrt(cache + state.epsilon)
        p.values = (p.values.astype(np.float64) - step).astype(p.values.dtype)


def embedding_sgd_step(table: EmbeddingTable, lr_embed: float = EMBED_LEARNING_RATE) -> None:
    """Plain SGD on the rows touched this batch; untouched rows untouched."""
    if not table.touched:
        return
    rows = np.fromiter(sorted(table.touched), dtype=np.int64)
    values = table.matrix.values
    grads = table.matrix.grad[rows].astype(np.float64)
    values[rows] = (values[rows].astype(np.float64) - lr_embed * grads).astype(values.dtype)


def clip_global_norm(params: Sequence[Tensor], max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most max_norm."""
    total = 0.0
    for p in params:
        total += float(np.sum(p.grad.astype(np.float64) ** 2))
    norm = float(np.sqrt(total))
    if max_norm and norm > max_norm:
        ratio = max_norm / norm
        for p in params:
            p.grad *= ratio
    return norm


def grad_check(
    loss_fn: Callable[[Tape | None], Tensor],
    params: Sequence[Tensor],
    step: float = 1e-3,
    max_entries: int = 10_000,
    seed: int = 0,
) -> float:
    """Max relative error between tape gradients and central differences.

    loss_fn(tape) must rebuild the forward pass from the current parameter
    values, recording on the given tape (or plain evaluation when None).
    Parameters are upcast to float64 for the duration of the check —
    float32 differencing at step 1e-3 is dominated by rounding — and
    restored afterwards. Entries are subsampled above max_entries.

    Relative error per entry: |a - n| / max(|a|, |n|, 1e-8).
    """
    saved = [(p.values, p.grad) for p in params]
    for p in params:
        p.values = p.values.astype(np.float64)
        p.grad = np.zeros_like(p.values)
    try:
        run_tape = Tape()
        loss = loss_fn(run_tape)
        if not np.isfinite(loss.values):
            raise NumericalError("loss is non-finite at the evaluation point")
        run_tape.backward(loss)
        analytic = [p.grad.copy() for p in params]

        entries = [(i, j) for i, p in enumerate(params) for j in range(p.values.size)]
        if len(entries) > max_entries:
            rng = np.random.default_rng(seed)
            picks = rng.choice(len(entries), size=max_entries, replace=False)
            entries = [entries[int(i)] for i in picks]

        worst = 0.0
        for i, j in entries:
            flat = params[i].values.reshape(-1)
            original = flat[j]
            flat[j] = original + step
            loss_plus = float(loss_fn(None).values)
            flat[j] = original - step
            loss_minus = float(loss_fn(None).values)
            flat[j] = original
            if not (np.isfinite(loss_plus) and np.isfinite(loss_minus)):
                raise NumericalError(
                    f"non-finite loss while perturbing tensor "
                    f"{params[i].name or i} entry {j}"
                )
            numeric = (loss_plus - loss_minus) / (2.0 * step)
            a = float(analytic[i].reshape(-1)[j])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, rel)
        return worst
    finally:
        for p, (values, grad) in zip(params, saved):
            p.values = values
            p.grad = grad
