"""Reverse-accumulation autodiff over an explicitly recorded operation tape.

Just enough machinery for GRU encoder-decoders: affine maps, element-wise
gates and products, embedding gathers, and a fused softmax cross-entropy.
Every op computes eagerly with numpy. When a Tape is supplied, the op
allocates a gradient buffer on its output and appends a closure that
accumulates into the inputs' .grad buffers; Tape.backward replays the
closures in reverse. With tape=None the ops are plain forward evaluation.

Activations follow the dtype of their inputs, so the same graph runs in
float32 for training and float64 for gradient checking.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit


class Tensor:
    """A named value array with an optional same-shape gradient buffer."""

    __slots__ = ("values", "grad", "name")

    def __init__(self, values, name: str = "", trainable: bool = False):
        self.values = np.asarray(values)
        self.name = name
        self.grad = np.zeros_like(self.values) if trainable else None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def attach_grad(self) -> "Tensor":
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        return self

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0

    def __repr__(self) -> str:
        return f"Tensor({self.name or 'unnamed'}, shape={self.values.shape})"


class Tape:
    """Ordered record of backward closures for one forward pass."""

    def __init__(self):
        self._backward_ops = []

    def record(self, backward_fn) -> None:
        self._backward_ops.append(backward_fn)

    def __len__(self) -> int:
        return len(self._backward_ops)

    def backward(self, loss: Tensor) -> None:
        """Seed d(loss)/d(loss) = 1 and run recorded closures in reverse."""
        if loss.values.ndim != 0:
            raise ValueError("backward expects a scalar loss tensor")
        loss.grad = np.ones_like(loss.values)
        for fn in reversed(self._backward_ops):
            fn()


def _out(values, tape: Tape | None) -> Tensor:
    t = Tensor(values)
    if tape is not None:
        t.attach_grad()
    return t


def linear(x: Tensor, w: Tensor, b: Tensor | None = None, tape: Tape | None = None) -> Tensor:
    """x (B,I) times w (O,I) transposed, plus optional bias (O,)."""
    values = x.values @ w.values.T
    if b is not None:
        values = values + b.values
    out = _out(values, tape)
    if tape is not None:
        def backward():
            g = out.grad
            if x.grad is not None:
                x.grad += g @ w.values
            if w.grad is not None:
                w.grad += g.T @ x.values
            if b is not None and b.grad is not None:
                b.grad += g.sum(axis=0)
        tape.record(backward)
    return out


def add(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    """Element-wise sum of two same-shape tensors."""
    out = _out(a.values + b.values, tape)
    if tape is not None:
        def backward():
            g = out.grad
            if a.grad is not None:
                a.grad += g
            if b.grad is not None:
                b.grad += g
        tape.record(backward)
    return out


def mul(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    out = _out(a.values * b.values, tape)
    if tape is not None:
        def backward():
            g = out.grad
            if a.grad is not None:
                a.grad += g * b.values
            if b.grad is not None:
                b.grad += g * a.values
        tape.record(backward)
    return out


def one_minus(a: Tensor, tape: Tape | None = None) -> Tensor:
    out = _out(1.0 - a.values, tape)
    if tape is not None:
        def backward():
            if a.grad is not None:
                a.grad -= out.grad
        tape.record(backward)
    return out


def sigmoid(a: Tensor, tape: Tape | None = None) -> Tensor:
    s = expit(a.values)
    out = _out(s, tape)
    if tape is not None:
        def backward():
            if a.grad is not None:
                a.grad += out.grad * s * (1.0 - s)
        tape.record(backward)
    return out


def tanh(a: Tensor, tape: Tape | None = None) -> Tensor:
    t = np.tanh(a.values)
    out = _out(t, tape)
    if tape is not None:
        def backward():
            if a.grad is not None:
                a.grad += out.grad * (1.0 - t * t)
        tape.record(backward)
    return out


def lerp(a: Tensor, b: Tensor, weight: np.ndarray, tape: Tape | None = None) -> Tensor:
    """weight*a + (1-weight)*b with a constant (non-differentiated) weight.

    Used for padding masks: rows with weight 0 keep b and pass no gradient
    into the a branch.
    """
    out = _out(weight * a.values + (1.0 - weight) * b.values, tape)
    if tape is not None:
        def backward():
            g = out.grad
            if a.grad is not None:
                a.grad += weight * g
            if b.grad is not None:
                b.grad += (1.0 - weight) * g
        tape.record(backward)
    return out


def gather(table: Tensor, ids: np.ndarray, tape: Tape | None = None) -> Tensor:
    """Row lookup table[ids]; backward scatter-adds into the table rows."""
    out = _out(table.values[ids], tape)
    if tape is not None:
        def backward():
            if table.grad is not None:
                np.add.at(table.grad, ids, out.grad)
        tape.record(backward)
    return out


def scale(a: Tensor, c: float, tape: Tape | None = None) -> Tensor:
    out = _out(a.values * c, tape)
    if tape is not None:
        def backward():
            if a.grad is not None:
                a.grad += out.grad * c
        tape.record(backward)
    return out


def sum_all(a: Tensor, tape: Tape | None = None) -> Tensor:
    out = _out(a.values.sum(), tape)
    if tape is not None:
        def backward():
            if a.grad is not None:
                a.grad += out.grad
        tape.record(backward)
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-shifted softmax along the last axis (plain ndarray utility)."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_xent(
    logits: Tensor,
    targets: np.ndarray,
    weights: np.ndarray | None = None,
    tape: Tape | None = None,
) -> tuple[Tensor, np.ndarray]:
    """Fused stabilized softmax + negative log-likelihood.

    logits (B,V), targets (B,) class ids, optional per-row weights (B,).
    Returns (scalar summed loss, probability rows). The probability rows
    are a plain ndarray; gradients flow through the fused op only.
    """
    targets = np.asarray(targets)
    if targets.max(initial=0) >= logits.values.shape[-1]:
        raise IndexError("target id out of range for logits")
    probs = softmax(logits.values)
    rows = np.arange(logits.values.shape[0])
    nll = -np.log(probs[rows, targets])
    if weights is None:
        weights = np.ones_like(nll)
    loss = _out((nll * weights).sum(), tape)
    if tape is not None:
        def backward():
            if logits.grad is not None:
                diff = probs.copy()
                diff[rows, targets] -= 1.0
                logits.grad += diff * (weights * loss.grad)[:, None]
        tape.record(backward)
    return loss, probs
