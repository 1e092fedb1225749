import math

import numpy as np

from dnsgt.exceptions import (
    IdOutOfRange,
    MissingLabels,
    NoMaskedPositions,
    NonFiniteDetected,
    NotScalar,
    ShapeMismatch,
)
from dnsgt.tensor import Parameter, Tensor, backward
from dnsgt.tensor import functional as F
from tests.base import BaseTestCase


class TestSoftmax(BaseTestCase):
    def test_single_allowed_entry(self):
        """Test that a row with one allowed entry puts all its probability there."""
        output = F.masked_softmax_rows(Tensor([[0.0, 0.0]]), np.array([[True, False]]))
        np.testing.assert_array_equal(output.data, [[1.0, 0.0]])

    def test_hand_computed_row(self):
        """Test a row whose exponentials are 2 and 1."""
        output = F.masked_softmax_rows(Tensor([[math.log(2), 0.0]]), np.array([[True, True]]))
        np.testing.assert_allclose(output.data, [[2 / 3, 1 / 3]], rtol=0, atol=1e-15)

    def test_row_without_allowed_entries_is_zero(self):
        """Test that a fully masked row gives zeros rather than NaNs."""
        output = F.masked_softmax_rows(Tensor([[1.0, 2.0], [3.0, 4.0]]), np.array([[False, False], [True, True]]))
        np.testing.assert_array_equal(output.data[0], [0.0, 0.0])
        self.assertAlmostEqual(output.data[1].sum(), 1.0, places=12)

    def test_rows_sum_to_one(self):
        """Test that softmax rows sum to one even for large scores."""
        scores = np.random.default_rng(0).normal(scale=50, size=(5, 7))
        allowed = np.random.default_rng(1).random((5, 7)) < 0.6
        allowed[:, 0] = True

        np.testing.assert_allclose(F.softmax_rows(Tensor(scores)).data.sum(axis=-1), 1.0, rtol=0, atol=1e-12)
        masked = F.masked_softmax_rows(Tensor(scores), allowed).data
        np.testing.assert_allclose(masked.sum(axis=-1), 1.0, rtol=0, atol=1e-12)
        self.assertTrue((masked[~allowed] == 0).all())

    def test_mask_of_wrong_shape(self):
        """Test that a mask that can't be broadcast to the scores is rejected."""
        with self.assertRaises(ShapeMismatch):
            F.masked_softmax_rows(Tensor(np.zeros((2, 3))), np.ones((2, 2), dtype=bool))


class TestLosses(BaseTestCase):
    def test_uniform_logits(self):
        """Test that uniform logits give a cross-entropy of ln V per selected position."""
        loss = F.cross_entropy_masked(Tensor(np.zeros((2, 3, 7))), np.zeros((2, 3)), np.ones((2, 3), dtype=bool))
        self.assertAlmostEqual(loss.item(), math.log(7), places=12)

    def test_confident_logit(self):
        """Test the cross-entropy of a single position whose target logit is 10 and the rest 0."""
        logits = np.zeros((1, 5))
        logits[0, 2] = 10
        loss = F.cross_entropy_masked(Tensor(logits), np.array([2]), np.array([True]))
        self.assertAlmostEqual(loss.item(), -math.log(math.exp(10) / (math.exp(10) + 4)), places=12)

    def test_unselected_positions_do_not_matter(self):
        """Test that changing the logits of unselected positions leaves the cross-entropy bit-identical."""
        rng = np.random.default_rng(0)
        logits = rng.normal(size=(4, 6))
        targets = np.array([0, 1, 2, 3])
        mask = np.array([True, False, True, False])
        perturbed = logits.copy()
        perturbed[~mask] += rng.normal(size=(2, 6)) * 100

        self.assertEqual(
            F.cross_entropy_masked(Tensor(logits), targets, mask).item(),
            F.cross_entropy_masked(Tensor(perturbed), targets, mask).item(),
        )

    def test_no_selected_positions(self):
        """Test that a cross-entropy without selected positions is rejected."""
        with self.assertRaises(NoMaskedPositions):
            F.cross_entropy_masked(Tensor(np.zeros((2, 3))), np.zeros(2), np.zeros(2, dtype=bool))

    def test_binary_cross_entropy_is_finite_for_saturated_logits(self):
        """Test that huge logits give a finite binary cross-entropy."""
        loss = F.binary_cross_entropy(Tensor([1000.0, -1000.0]), np.array([0.0, 1.0]), np.array([True, True]))
        self.assertAlmostEqual(loss.item(), 1000.0)

    def test_binary_cross_entropy_ignores_unlabelled_positions(self):
        """Test that flipping the label of an unlabelled position leaves the binary cross-entropy unchanged."""
        logits = Tensor([0.3, -1.2, 2.0])
        mask = np.array([True, True, False])
        self.assertEqual(
            F.binary_cross_entropy(logits, np.array([1.0, 0.0, 0.0]), mask).item(),
            F.binary_cross_entropy(logits, np.array([1.0, 0.0, 1.0]), mask).item(),
        )

    def test_binary_cross_entropy_without_labels(self):
        """Test that a binary cross-entropy without labelled positions is rejected."""
        with self.assertRaises(MissingLabels):
            F.binary_cross_entropy(Tensor([0.0]), np.array([1.0]), np.array([False]))


class TestOtherOperations(BaseTestCase):
    def test_matmul_shape_mismatch(self):
        """Test that multiplying matrices with incompatible inner dimensions is rejected."""
        with self.assertRaises(ShapeMismatch):
            F.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))

    def test_add_broadcasting_mismatch(self):
        """Test that adding shapes that can't be broadcast together is rejected."""
        with self.assertRaises(ShapeMismatch):
            F.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros(2)))

    def test_non_finite_output(self):
        """Test that an operation producing an infinity is aborted."""
        with self.assertRaises(NonFiniteDetected):
            F.mul(Tensor([1e200]), Tensor([1e200]))

    def test_embedding_gather_out_of_range(self):
        """Test that gathering an id outside the table is rejected."""
        with self.assertRaises(IdOutOfRange):
            F.embedding_gather(Tensor(np.zeros((3, 2))), np.array([0, 3]))

    def test_embedding_gather_accumulates_repeated_ids(self):
        """Test that the gradient of a row gathered twice is the sum of both gradients."""
        table = Parameter("table", np.zeros((3, 2)))
        backward(F.sum(F.embedding_gather(table, np.array([1, 1, 2]))))
        np.testing.assert_array_equal(table.grad, [[0, 0], [2, 2], [1, 1]])

    def test_layer_norm_rows(self):
        """Test that layer normalisation with unit gain and zero bias gives rows of zero mean and unit variance."""
        x = np.random.default_rng(0).normal(loc=3, scale=2, size=(4, 16))
        output = F.layer_norm_rows(Tensor(x), Tensor(np.ones(16)), Tensor(np.zeros(16))).data
        np.testing.assert_allclose(output.mean(axis=-1), 0, atol=1e-12)
        np.testing.assert_allclose(output.var(axis=-1), 1, atol=1e-4)

    def test_batch_norm_modes(self):
        """Test that training mode normalises with the selected rows and updates the running statistics, while eval
        mode uses the running statistics and updates nothing.
        """
        state = F.BatchNormState(2, momentum=0.5)
        x = Tensor([[1.0, 2.0], [3.0, 6.0], [100.0, 100.0]])
        mask = np.array([True, True, False])
        gamma, beta = Tensor(np.ones(2)), Tensor(np.zeros(2))

        output = F.batch_norm(x, gamma, beta, state, token_mask=mask, training=True).data
        np.testing.assert_allclose(output[:2].mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(state.running_mean, [1.0, 2.0])
        np.testing.assert_allclose(state.running_var, [1.0, 2.5])

        running_mean = state.running_mean.copy()
        evaluated = F.batch_norm(x, gamma, beta, state, token_mask=mask, training=False).data
        np.testing.assert_array_equal(state.running_mean, running_mean)
        np.testing.assert_allclose(evaluated[1], np.array([2.0, 4.0]) / np.sqrt(np.array([1.0, 2.5]) + 1e-5))

    def test_dropout(self):
        """Test that dropout is the identity outside training and zeroes and rescales entries in training."""
        x = Tensor(np.ones((100, 100)))
        self.assertIs(F.dropout(x, 0.5, np.random.default_rng(0), training=False), x)

        dropped = F.dropout(x, 0.5, np.random.default_rng(0), training=True).data
        self.assertEqual(set(np.unique(dropped)), {0.0, 2.0})
        self.assertAlmostEqual((dropped == 0).mean(), 0.5, delta=0.02)

    def test_mean_pool_rows(self):
        """Test that mean pooling averages the selected rows only."""
        x = Tensor(np.array([[[1.0, 2.0], [3.0, 4.0], [100.0, 100.0]]]))
        pooled = F.mean_pool_rows(x, np.array([[True, True, False]]))
        np.testing.assert_array_equal(pooled.data, [[2.0, 3.0]])


class TestBackward(BaseTestCase):
    def test_non_scalar_loss(self):
        """Test that backpropagation from a non-scalar tensor is rejected."""
        with self.assertRaises(NotScalar):
            backward(Parameter("x", [1.0, 2.0]) * 2)

    def test_shared_subexpression(self):
        """Test that a tensor used twice receives the sum of both gradient contributions."""
        x = Parameter("x", [3.0])
        y = x * x
        backward(F.sum(y + y * x))
        np.testing.assert_allclose(x.grad, [2 * 3.0 + 3 * 3.0**2])

    def test_gradients_accumulate_until_cleared(self):
        """Test that repeated backward passes accumulate into the leaves' gradients."""
        x = Parameter("x", [1.0])
        backward(F.sum(x * 2))
        backward(F.sum(x * 2))
        np.testing.assert_array_equal(x.grad, [4.0])

    def test_constants_get_no_gradient(self):
        """Test that operations on constants don't record a graph."""
        result = Tensor([1.0]) + Tensor([2.0])
        self.assertFalse(result.requires_grad)
        self.assertTrue(result.is_leaf)
