import numpy as np
import pytest

from seq2bf import tape as T
from seq2bf.nn import grad_check
from seq2bf.tape import Tape, Tensor


def rand(shape, seed, lo=-1.0, hi=1.0):
    return np.random.default_rng(seed).uniform(lo, hi, shape)


def check_op(build_loss, params, tol=1e-6):
    err = grad_check(build_loss, params, step=1e-4)
    assert err < tol, f"max relative error {err}"


class TestOpGradients:
    """Each op against central finite differences."""

    def test_linear_with_bias(self):
        x = Tensor(rand((3, 4), 0), name="x", trainable=True)
        w = Tensor(rand((5, 4), 1), name="w", trainable=True)
        b = Tensor(rand((5,), 2), name="b", trainable=True)
        check_op(lambda tp: T.sum_all(T.linear(x, w, b, tp), tp), [x, w, b])

    def test_add_mul_one_minus(self):
        a = Tensor(rand((2, 3), 3), name="a", trainable=True)
        b = Tensor(rand((2, 3), 4), name="b", trainable=True)

        def loss(tp):
            s = T.add(a, b, tp)
            p = T.mul(s, T.one_minus(a, tp), tp)
            return T.sum_all(p, tp)

        check_op(loss, [a, b])

    def test_sigmoid_tanh(self):
        a = Tensor(rand((4, 2), 5), name="a", trainable=True)

        def loss(tp):
            return T.sum_all(T.mul(T.sigmoid(a, tp), T.tanh(a, tp), tp), tp)

        check_op(loss, [a])

    def test_lerp_mask(self):
        a = Tensor(rand((3, 2), 6), name="a", trainable=True)
        b = Tensor(rand((3, 2), 7), name="b", trainable=True)
        mask = np.array([[1.0], [0.0], [1.0]])
        check_op(lambda tp: T.sum_all(T.lerp(a, b, mask, tp), tp), [a, b])

    def test_gather_scatter(self):
        table = Tensor(rand((6, 3), 8), name="table", trainable=True)
        ids = np.array([0, 2, 2, 5])
        check_op(lambda tp: T.sum_all(T.gather(table, ids, tp), tp), [table])

    def test_scale(self):
        a = Tensor(rand((2, 2), 9), name="a", trainable=True)
        check_op(lambda tp: T.scale(T.sum_all(a, tp), -2.5, tp), [a])

    def test_softmax_xent(self):
        logits = Tensor(rand((4, 10), 10), name="logits", trainable=True)
        targets = np.array([1, 0, 9, 4])
        weights = np.array([1.0, 0.5, 0.0, 2.0])

        def loss(tp):
            out, _ = T.softmax_xent(logits, targets, weights, tp)
            return out

        check_op(loss, [logits], tol=1e-5)


class TestSoftmax:
    def test_rows_sum_to_one(self):
        probs = T.softmax(rand((5, 7), 11, -10, 10))
        assert np.allclose(probs.sum(axis=-1), 1.0, atol=1e-6)
        assert (probs > 0).all()

    def test_shift_invariance(self):
        logits = rand((7,), 12)
        assert np.allclose(T.softmax(logits), T.softmax(logits + 123.0))

    def test_masked_rows_contribute_nothing(self):
        logits = Tensor(rand((2, 4), 13), name="l", trainable=True)
        tp = Tape()
        loss, _ = T.softmax_xent(logits, np.array([0, 1]),
                                 np.array([1.0, 0.0]), tp)
        tp.backward(loss)
        assert np.allclose(logits.grad[1], 0.0)
        assert not np.allclose(logits.grad[0], 0.0)

    def test_out_of_range_target(self):
        logits = Tensor(rand((1, 4), 14))
        with pytest.raises(IndexError):
            T.softmax_xent(logits, np.array([4]))


class TestTape:
    def test_backward_requires_scalar(self):
        t = Tensor(rand((2, 2), 15))
        with pytest.raises(ValueError):
            Tape().backward(t)

    def test_no_tape_records_nothing(self):
        a = Tensor(rand((2, 2), 16), trainable=True)
        out = T.mul(a, a, None)
        assert out.grad is None

    def test_gradients_accumulate_across_uses(self):
        # f = sum(a) + sum(a) -> grad is 2 everywhere
        a = Tensor(np.ones((2, 2)), trainable=True)
        tp = Tape()
        loss = T.add(T.sum_all(a, tp), T.sum_all(a, tp), tp)
        tp.backward(loss)
        assert np.allclose(a.grad, 2.0)
