"""Testing of the differentiation core.

Gradients are compared against central finite differences on random,
tie-free inputs.
"""

import logging
import sys
from unittest import TestCase, main

import numpy as np

from sliced_cnp.diffmath import (Tape, Tensor, abs_pow, add, backward,
                                 check_gradient, check_gradients,
                                 concat_cols, div, elementwise, log, matmul,
                                 mean, mul, reduce, relu, reshape, scale,
                                 shift, slice_cols, softplus, sort_rows, sub,
                                 tanh, tile_rows, total, transpose)
from sliced_cnp.exceptions import ContractError, ShapeError

logging.basicConfig(stream=sys.stderr)
log_ = logging.getLogger(__name__)
log_.setLevel(logging.DEBUG)

TOL = 1e-4


class TestForward(TestCase):
    """Values of primitives without any tape."""

    def test_matmul_identity(self):
        a = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(matmul(a, np.eye(3)).values, a)

    def test_matmul_shape_error_names_shapes(self):
        with self.assertRaises(ShapeError) as cm:
            matmul(np.ones((2, 3)), np.ones((2, 3)))
        self.assertIn("(2, 3)", str(cm.exception))

    def test_row_broadcast(self):
        a = np.ones((3, 2))
        out = add(a, np.array([[1.0, 2.0]]))
        np.testing.assert_array_equal(out.values, [[2, 3]] * 3)

    def test_bad_broadcast(self):
        with self.assertRaises(ShapeError):
            add(np.ones((3, 2)), np.ones((2, 3)))

    def test_sort_rows_permutation(self):
        a = np.array([[3.0, 1.0, 2.0]])
        out, perm = sort_rows(a)
        np.testing.assert_array_equal(out.values, [[1, 2, 3]])
        np.testing.assert_array_equal(perm, [[1, 2, 0]])

    def test_sort_rows_ties_stable(self):
        _, perm = sort_rows(np.array([[1.0, 1.0, 0.0]]))
        np.testing.assert_array_equal(perm, [[2, 0, 1]])

    def test_reduce_axis(self):
        a = np.arange(6.0).reshape(2, 3)
        np.testing.assert_allclose(mean(a, axis=0).values, [1.5, 2.5, 3.5])
        self.assertEqual(total(a).item(), 15.0)

    def test_reduce_bad_axis(self):
        with self.assertRaises(ShapeError):
            reduce("sum", np.ones((2, 2)), axis=2)

    def test_reduce_empty(self):
        with self.assertRaises(ShapeError):
            mean(np.ones((0, 3)), axis=0)

    def test_reduce_unknown_kind(self):
        with self.assertRaises(ContractError):
            reduce("max", np.ones(3))

    def test_elementwise_dispatch(self):
        x = np.array([-1.0, 2.0])
        np.testing.assert_array_equal(elementwise("relu", x).values, [0, 2])
        np.testing.assert_array_equal(
            elementwise("abs_pow", x, p=2).values, [1, 4])
        np.testing.assert_array_equal(
            elementwise("shift", x, c=1.0).values, [0, 3])
        with self.assertRaises(ContractError):
            elementwise("abs_pow", x)
        with self.assertRaises(ContractError):
            elementwise("cosh", x)

    def test_log_non_positive(self):
        with self.assertRaises(ContractError):
            log(np.array([1.0, 0.0]))

    def test_softplus_large_input(self):
        out = softplus(np.array([1000.0, -1000.0])).values
        self.assertEqual(out[0], 1000.0)
        self.assertTrue(np.all(out >= 0))

    def test_item_non_scalar(self):
        with self.assertRaises(ContractError):
            Tensor(np.ones(2)).item()

    def test_operator_sugar(self):
        a, b = Tensor([[1.0, 2.0]]), Tensor([[3.0, 4.0]])
        np.testing.assert_array_equal((a + b).values, [[4, 6]])
        np.testing.assert_array_equal((b - a).values, [[2, 2]])
        np.testing.assert_array_equal((a * 2).values, [[2, 4]])
        np.testing.assert_array_equal((-a).values, [[-1, -2]])
        np.testing.assert_array_equal((a @ b.T).values, [[11]])

    def test_scalar_operands(self):
        a = Tensor([[1.0, 2.0]])
        np.testing.assert_array_equal((a + 1.0).values, [[2, 3]])
        np.testing.assert_array_equal((2 + a).values, [[3, 4]])
        np.testing.assert_array_equal((a - 0.5).values, [[0.5, 1.5]])
        np.testing.assert_array_equal((1.0 - a).values, [[0, -1]])


class TestBackward(TestCase):
    """Tape mechanics and analytic gradients."""

    def setUp(self):
        self.gen = np.random.default_rng(11)

    def test_square_gradient(self):
        tape = Tape()
        x = tape.watch([1.0, 2.0])
        grads = tape.backward(total(abs_pow(x, 2)))
        np.testing.assert_allclose(grads[x.node].values, [2.0, 4.0])

    def test_unreached_leaf_zero(self):
        tape = Tape()
        x, y = tape.watch([1.0]), tape.watch([5.0, 6.0])
        grads = tape.backward(total(x))
        np.testing.assert_array_equal(grads[y.node].values, [0.0, 0.0])

    def test_gradient_accumulates(self):
        tape = Tape()
        x = tape.watch([3.0])
        loss = total(add(mul(x, x), x))
        (g, ) = tape.gradient(loss, [x])
        np.testing.assert_allclose(g.values, [7.0])

    def test_repeated_backward_identical(self):
        tape = Tape()
        x = tape.watch(self.gen.normal(size=(2, 3)))
        loss = mean(tanh(x))
        first = tape.backward(loss)[x.node].values
        second = tape.backward(loss)[x.node].values
        np.testing.assert_array_equal(first, second)

    def test_non_scalar_loss(self):
        tape = Tape()
        x = tape.watch(np.ones(3))
        with self.assertRaises(ContractError):
            tape.backward(tanh(x))

    def test_untracked_loss(self):
        with self.assertRaises(ContractError):
            backward(total(np.ones(3)))

    def test_mixed_tapes(self):
        a, b = Tape().watch(np.ones(2)), Tape().watch(np.ones(2))
        with self.assertRaises(ContractError):
            add(a, b)

    def test_scalar_operand_gradient(self):
        tape = Tape()
        x = tape.watch([1.0, 2.0])
        grads = tape.backward(total(abs_pow(1.0 - x, 2) + abs_pow(x + 3, 2)))
        np.testing.assert_allclose(grads[x.node].values, [8.0, 12.0])

    def test_abs_pow_zero_subgradient(self):
        tape = Tape()
        x = tape.watch([0.0, 2.0])
        grads = tape.backward(total(abs_pow(x, 1.0)))
        np.testing.assert_array_equal(grads[x.node].values, [0.0, 1.0])


class TestGradcheck(TestCase):
    """Every primitive against finite differences."""

    def setUp(self):
        self.gen = np.random.default_rng(3)
        self.x = self.gen.normal(size=(3, 4))

    def assertGradient(self, build, x=None):
        err = check_gradient(build, self.x if x is None else x)
        log_.debug(f"relative error {err:.2e}")
        self.assertLessEqual(err, TOL)

    def test_matmul(self):
        w = self.gen.normal(size=(4, 2))
        self.assertGradient(lambda t: total(tanh(matmul(t, w))))
        errors = check_gradients(lambda t: total(matmul(t["a"], t["b"])),
                                 {"a": self.x, "b": w})
        self.assertLessEqual(max(errors.values()), TOL)

    def test_unary(self):
        for op in (tanh, softplus, relu):
            with self.subTest(op=op.__name__):
                self.assertGradient(lambda t, op=op: total(op(t)))

    def test_abs_pow(self):
        for p in (1.0, 1.5, 2.0, 3.0):
            with self.subTest(p=p):
                self.assertGradient(lambda t, p=p: mean(abs_pow(t, p)))

    def test_binary(self):
        b = self.gen.uniform(0.5, 2.0, size=(3, 4))
        row = self.gen.normal(size=(1, 4))
        for op in (add, sub, mul, div):
            with self.subTest(op=op.__name__):
                self.assertGradient(lambda t, op=op: total(op(t, b)))
                errors = check_gradients(
                    lambda t, op=op: total(tanh(op(t["a"], t["b"]))),
                    {"a": self.x, "b": row if op is not div else b}
                )
                self.assertLessEqual(max(errors.values()), TOL)

    def test_log_div(self):
        pos = self.gen.uniform(0.5, 2.0, size=(3, 4))
        self.assertGradient(lambda t: total(log(t)), pos)
        self.assertGradient(lambda t: total(div(np.ones((3, 4)), t)), pos)

    def test_scale_shift(self):
        self.assertGradient(lambda t: total(tanh(shift(scale(t, 0.3), 1.0))))

    def test_sort_rows(self):
        target = self.gen.normal(size=(3, 4))
        self.assertGradient(
            lambda t: total(abs_pow(sub(sort_rows(t)[0], target), 2.0)))

    def test_reductions(self):
        self.assertGradient(lambda t: total(tanh(mean(t, axis=0))))
        self.assertGradient(lambda t: total(tanh(total(t, axis=1))))

    def test_shape_ops(self):
        self.assertGradient(lambda t: total(tanh(reshape(t, (2, 6)))))
        self.assertGradient(lambda t: total(tanh(matmul(transpose(t), t))))
        self.assertGradient(lambda t: total(tanh(slice_cols(t, 1, 3))))
        self.assertGradient(
            lambda t: total(tanh(concat_cols(t, tile_rows(mean(t, 0), 3)))))


if __name__ == "__main__":
    main()
