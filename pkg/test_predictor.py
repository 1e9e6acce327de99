import unittest

import numpy as np
import scipy.sparse as sp

from src.errors import DatasetFormatError, DimensionMismatchError, GroundTruthGateError, ValidationError
from src.models.binary_model import BinaryModel
from src.models.dataset import SparseDataset
from src.models.ovr_model import OvRModel
from src.models.prediction import PredictionSet
from src.predictor import (
    decision_matrix, predict, predict_basic, predict_no_empty, predict_one_label, predict_top_k,
    predict_unrealistic,
)
from src.theory import gen_perfect_ranking


# Test class for decision matrices
class TestDecisionMatrix(unittest.TestCase):
    def setUp(self):
        self.test = SparseDataset(sp.csr_matrix([[1.0, 3.0]]), [[0]], n_labels=2)

    def test_zero_model(self):
        """Test that a zero model scores every pair 0"""
        model = OvRModel([BinaryModel([0.0, 0.0]), BinaryModel([0.0, 0.0])], 2)
        np.testing.assert_array_equal(decision_matrix(model, self.test), [[0.0, 0.0]])

    def test_known_weights(self):
        """Test hand-computed dot products plus bias"""
        model = OvRModel([BinaryModel([1.0, 2.0], bias=0.5), BinaryModel([-1.0, 0.0])], 2)
        np.testing.assert_allclose(decision_matrix(model, self.test), [[7.5, -1.0]])

    def test_shift_adds_to_column(self):
        """Test that a threshold shift moves exactly its own column"""
        models = [BinaryModel([1.0, 2.0]), BinaryModel([-1.0, 0.0])]
        plain = decision_matrix(OvRModel(models, 2, strategy_tag="thresholding"), self.test)
        models[1] = models[1].with_delta(0.5)
        shifted = decision_matrix(OvRModel(models, 2, strategy_tag="thresholding"), self.test)
        np.testing.assert_array_equal(shifted[:, 0], plain[:, 0])
        np.testing.assert_array_equal(shifted[:, 1], plain[:, 1] + 0.5)

    def test_always_negative_column(self):
        """Test the -inf sentinel"""
        model = OvRModel([BinaryModel([1.0, 0.0]), BinaryModel([0.0, 0.0], always_negative=True)], 2)
        self.assertEqual(decision_matrix(model, self.test)[0, 1], -np.inf)

    def test_dimensions(self):
        """Test zero-padding of narrow data and rejection of wide data"""
        model = OvRModel([BinaryModel([1.0, 2.0, 4.0])], 3)
        np.testing.assert_allclose(decision_matrix(model, self.test), [[7.0]])
        wide = SparseDataset(sp.csr_matrix((1, 5)), [[]], n_labels=1)
        with self.assertRaises(DimensionMismatchError):
            decision_matrix(model, wide)


# Test class for prediction strategies
class TestPredict(unittest.TestCase):
    def setUp(self):
        self.random = np.random.default_rng(0).normal(size=(40, 5))

    def test_basic(self):
        """Test the sign rule with the >= 0 boundary"""
        pred = predict_basic([[0.3, -0.1, 0.0], [-1.0, -2.0, -np.inf]])
        self.assertEqual(pred.predicted, [(0, 2), ()])
        self.assertEqual(pred.strategy, "basic")

    def test_no_empty(self):
        """Test the argmax rescue and its tie-break"""
        pred = predict_no_empty([[-0.5, -0.1, -0.9], [0.3, -0.1, -1.0], [-0.2, -0.2, -0.3]])
        self.assertEqual(pred.predicted, [(1,), (0,), (0,)])

    def test_no_empty_extends_basic(self):
        """Test row-wise containment and equality on nonempty rows"""
        basic = predict_basic(self.random)
        rescued = predict_no_empty(self.random)
        for b, r in zip(basic.predicted, rescued.predicted):
            self.assertTrue(set(b) <= set(r))
            self.assertTrue(r)
            if b:
                self.assertEqual(b, r)

    def test_monotone_in_column(self):
        """Test that raising a column never removes its label"""
        before = predict_basic(self.random)
        raised = self.random.copy()
        raised[:, 2] += 0.7
        after = predict_basic(raised)
        for b, a in zip(before.predicted, after.predicted):
            if 2 in b:
                self.assertIn(2, a)

    def test_unrealistic(self):
        """Test top-K_i selection, K=0 and the audit warning"""
        with self.assertLogs("src.predictor", level="WARNING"):
            pred = predict_unrealistic([[0.9, 0.2, 0.5], [0.1, 0.2, 0.3]], [2, 0])
        self.assertEqual(pred.predicted, [(0, 2), ()])
        self.assertTrue(pred.ground_truth_used)
        with self.assertRaises(ValidationError):
            predict_unrealistic([[0.9, 0.2]], [3])

    def test_unrealistic_sizes(self):
        """Test that every instance gets exactly K_i labels"""
        counts = np.random.default_rng(1).integers(0, 6, size=40)
        with self.assertLogs("src.predictor", level="WARNING"):
            pred = predict_unrealistic(self.random, counts)
        np.testing.assert_array_equal(pred.counts(), counts)

    def test_unrealistic_on_perfect_ranking(self):
        """Test that true counts on a perfect ranking recover the truth"""
        ranking = gen_perfect_ranking(3, 30, 6, 0.4)
        with self.assertLogs("src.predictor", level="WARNING"):
            pred = predict_unrealistic(ranking.decisions, ranking.true_counts())
        self.assertEqual(pred.predicted, ranking.truth)

    def test_top_k(self):
        """Test k = 1, k = n_labels and the range check"""
        self.assertEqual(predict_top_k([[0.1, 0.9]], 1).predicted, [(1,)])
        self.assertEqual(predict_top_k([[0.1, 0.9, -3.0]], 3).predicted, [(0, 1, 2)])
        with self.assertRaises(ValidationError):
            predict_top_k([[0.1, 0.9]], 3)

    def test_top_k_matches_unrealistic(self):
        """Test agreement when every K_i equals k"""
        with self.assertLogs("src.predictor", level="WARNING"):
            unrealistic = predict_unrealistic(self.random, [2] * 40)
        self.assertEqual(predict_top_k(self.random, 2).predicted, unrealistic.predicted)

    def test_one_label(self):
        """Test argmax singletons"""
        pred = predict_one_label([[0.1, 0.9, 0.3], [0.5, 0.5, -1.0]])
        self.assertEqual(pred.predicted, [(1,), (0,)])

    def test_dispatch_and_gate(self):
        """Test strategy names and the ground-truth gate"""
        decisions = [[0.3, -0.1]]
        self.assertEqual(predict(decisions, "as-calibrated").strategy, "as-calibrated")
        self.assertEqual(predict(decisions, "cost-sensitive-no-empty").predicted, [(0,)])
        with self.assertRaises(GroundTruthGateError):
            predict(decisions, "unrealistic", true_label_counts=[1])
        with self.assertRaises(ValidationError):
            predict(decisions, "top-k")
        with self.assertRaises(ValidationError):
            predict(decisions, "everything")

    def test_pure(self):
        """Test that repeated calls agree exactly"""
        for strategy in ("basic", "no-empty", "one-label"):
            self.assertEqual(predict(self.random, strategy).predicted, predict(self.random, strategy).predicted)


# Test class for prediction dumps
class TestPredictionSet(unittest.TestCase):
    def test_lines(self):
        """Test empty lines for empty sets and parsing back"""
        pred = PredictionSet([[2, 0], [], [1]], 3)
        self.assertEqual(pred.to_lines(), ["0,2", "", "1"])
        self.assertEqual(PredictionSet.from_lines(pred.to_lines(), 3).predicted, pred.predicted)

    def test_invalid(self):
        """Test vocabulary, strategy and syntax checks"""
        with self.assertRaises(ValidationError):
            PredictionSet([[3]], 3)
        with self.assertRaises(ValidationError):
            PredictionSet([[0]], 3, strategy="guess")
        with self.assertRaises(DatasetFormatError):
            PredictionSet.from_lines(["0,x"])


if __name__ == "__main__":
    unittest.main()
