import unittest

import numpy as np
import scipy.sparse as sp

from src.calibration import (
    REFOLD_PER_PAIR, SHARED_FOLDS, CostGrid, ThresholdResult, build_cost_grid, calibrate_cost_sensitive,
    calibrate_thresholding, calibration_report, select_cost_pair, sweep_threshold,
)
from src.errors import ValidationError
from src.metrics import evaluate, f1_from_counts
from src.models.binary_model import BinaryProblem
from src.models.dataset import FoldPlan, SparseDataset
from src.predictor import decision_matrix, predict_basic
from src.solver import decision_values, train_binary
from src.trainer import confusion_row, fold_views, train_ovr_basic


def imbalanced_dataset():
    """Ten positives at x=0.2 followed by forty negatives at x=0."""
    X = np.array([[0.2]] * 10 + [[0.0]] * 40)
    return SparseDataset(sp.csr_matrix(X), [[0]] * 10 + [[]] * 40, n_labels=1)


def training_f1(model, data):
    truth = data.targets(0) > 0
    predicted = decision_values(model.models[0], data.features) >= 0
    return float(f1_from_counts(*confusion_row(truth, predicted)))


def oracle_best_f1(values, positive):
    """Best F1 over every 'value >= cut' rule, cuts taken from the values plus one above."""
    best = 0.0
    for cut in list(values) + [max(values) + 1.0]:
        predicted = values >= cut
        best = max(best, float(f1_from_counts(*confusion_row(positive, predicted))))
    return best


# Test class for the threshold sweep
class TestSweepThreshold(unittest.TestCase):
    def test_single_cut(self):
        """Test a midpoint cut between a positive and the negatives"""
        delta, f1 = sweep_threshold([(0.9, True), (0.5, False), (0.1, False)])
        self.assertAlmostEqual(delta, -0.7)
        self.assertEqual(f1, 1.0)

    def test_all_negative(self):
        """Test that a list without positives cuts above the maximum"""
        delta, f1 = sweep_threshold([(0.3, False), (0.1, False)])
        self.assertAlmostEqual(delta, -1.3)
        self.assertEqual(f1, 0.0)

    def test_all_positive(self):
        """Test that a list of positives cuts below the minimum"""
        delta, f1 = sweep_threshold([(0.3, True), (0.1, True)])
        self.assertAlmostEqual(delta, 0.9)
        self.assertEqual(f1, 1.0)

    def test_tied_values(self):
        """Test that equal values fall on the same side of the cut"""
        delta, f1 = sweep_threshold([(0.5, True), (0.5, False)])
        self.assertAlmostEqual(delta, 0.5)
        self.assertAlmostEqual(f1, 2.0 / 3.0)

    def test_adjacent_floats(self):
        """Test that a cut between neighbouring floats rejects the lower value"""
        values = np.array([1.0 + 2.0 ** -52, 1.0])
        delta, f1 = sweep_threshold([(values[0], True), (values[1], False)])
        self.assertEqual(f1, 1.0)
        self.assertEqual((values + delta >= 0).tolist(), [True, False])

    def test_errors(self):
        """Test empty and non-finite input"""
        with self.assertRaises(ValidationError):
            sweep_threshold([])
        with self.assertRaises(ValidationError):
            sweep_threshold([(np.nan, True)])

    def test_against_brute_force(self):
        """Test the best F1 and the returned shift on random lists with ties"""
        rng = np.random.default_rng(0)
        for trial in range(500):
            n = int(rng.integers(1, 13))
            values = rng.integers(0, 6, size=n) / 2.0
            positive = rng.random(n) < 0.4
            delta, f1 = sweep_threshold(list(zip(values, positive)))
            expected = oracle_best_f1(values, positive)
            self.assertAlmostEqual(f1, expected, msg=f"trial {trial}")
            achieved = float(f1_from_counts(*confusion_row(positive, values + delta >= 0)))
            self.assertAlmostEqual(achieved, f1, msg=f"trial {trial}")

    def test_shift_invariance(self):
        """Test that shifting all values shifts delta the other way"""
        rng = np.random.default_rng(1)
        for _ in range(50):
            values = rng.integers(0, 8, size=10) / 4.0
            positive = rng.random(10) < 0.5
            delta, f1 = sweep_threshold(list(zip(values, positive)))
            shifted_delta, shifted_f1 = sweep_threshold(list(zip(values + 10.0, positive)))
            self.assertAlmostEqual(shifted_delta, delta - 10.0)
            self.assertEqual(shifted_f1, f1)

    def test_threshold_result_mean(self):
        """Test the averaged shift and the empty case"""
        self.assertAlmostEqual(ThresholdResult(0, [1.0, 2.0, 4.0], 0.1).delta, 7.0 / 3.0)
        self.assertEqual(ThresholdResult(0, [], 0.0).delta, 0.0)


# Test class for cost grids
class TestCostGrid(unittest.TestCase):
    def test_dense_grid(self):
        """Test the ten-by-twenty-one grid with refolding"""
        grid = build_cost_grid("dense")
        self.assertEqual(len(grid), 210)
        self.assertEqual(grid.fold_policy, REFOLD_PER_PAIR)
        self.assertIn((1.0, 1.0), grid.pairs)
        self.assertEqual(grid.strategy_tag, "cost-sensitive")
        self.assertEqual(sorted({t for _, t in grid.pairs}), [i / 10 for i in range(1, 11)])

    def test_simple_grid(self):
        """Test the seven-by-five grid on shared folds"""
        grid = build_cost_grid("simple")
        self.assertEqual(len(grid), 35)
        self.assertEqual(grid.fold_policy, SHARED_FOLDS)
        self.assertIn((1.0, 1.0), grid.pairs)
        self.assertTrue(any(abs(C - 700.0) < 1e-9 and t == 1 / 7 for C, t in grid.pairs))
        self.assertEqual(grid.strategy_tag, "cost-sensitive-simple")

    def test_paths_group_by_t(self):
        """Test ascending-C paths per t"""
        grid = CostGrid([(4.0, 1.0), (1.0, 0.5), (1.0, 1.0), (0.5, 0.5)])
        self.assertEqual(grid.paths(), [[3, 1], [2, 0]])

    def test_invalid(self):
        """Test pair and policy checks"""
        with self.assertRaises(ValidationError):
            CostGrid([])
        with self.assertRaises(ValidationError):
            CostGrid([(1.0, 0.0)])
        with self.assertRaises(ValidationError):
            CostGrid([(0.0, 1.0)])
        with self.assertRaises(ValidationError):
            CostGrid([(1.0, 1.0)], fold_policy="sometimes")
        with self.assertRaises(ValidationError):
            build_cost_grid("medium")

    def test_select_cost_pair(self):
        """Test ties toward larger t then smaller C, and the all-zero fallback"""
        grid = CostGrid([(1.0, 0.5), (2.0, 1.0), (4.0, 1.0), (0.5, 0.2)])
        self.assertEqual(select_cost_pair(grid, [0.8, 0.8, 0.8, 0.8]), ((2.0, 1.0), 0.8))
        self.assertEqual(select_cost_pair(grid, [0.9, 0.8, 0.8, 0.9]), ((1.0, 0.5), 0.9))
        self.assertEqual(select_cost_pair(grid, [0.0, 0.0, 0.0, 0.0]), ((1.0, 1.0), 0.0))


# Test class for calibrated training on an imbalanced label
class TestImbalancedCalibration(unittest.TestCase):
    def setUp(self):
        self.train = imbalanced_dataset()
        self.folds = FoldPlan(seed=0, k=5, assignment=[i % 5 for i in range(50)])

    def test_basic_misses_minority(self):
        """Test that unweighted training never predicts the rare label"""
        model = train_ovr_basic(self.train, C=1.0)
        self.assertLess(model.models[0].bias, 0.0)
        self.assertEqual(training_f1(model, self.train), 0.0)

    def test_thresholding_recovers_minority(self):
        """Test a positive shift that separates the two groups"""
        model = calibrate_thresholding(self.train, C=1.0, outer_folds=self.folds)
        self.assertEqual(model.strategy_tag, "thresholding")
        self.assertAlmostEqual(model.models[0].delta, 1.135, delta=0.05)
        self.assertEqual(training_f1(model, self.train), 1.0)
        self.assertEqual(model.diagnostics[0]["fold_f1"], [1.0] * 5)
        self.assertIn(model.diagnostics[0]["fbr"], [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])

    def test_thresholding_label_without_positives(self):
        """Test that a never-seen label keeps a zero shift"""
        train = SparseDataset(self.train.features, self.train.label_sets, n_labels=2)
        model = calibrate_thresholding(train, C=1.0, outer_folds=self.folds)
        self.assertTrue(model.models[1].always_negative)
        self.assertEqual(model.models[1].delta, 0.0)

    def test_cost_sensitive_simple_grid(self):
        """Test that the simple grid finds a perfect pair"""
        model = calibrate_cost_sensitive(self.train, build_cost_grid("simple"), folds=self.folds)
        self.assertEqual(model.strategy_tag, "cost-sensitive-simple")
        self.assertEqual(model.diagnostics[0]["cv_f1"], 1.0)
        self.assertEqual(training_f1(model, self.train), 1.0)
        self.assertEqual(model.fold_digest, self.folds.digest())

    def test_small_t_beats_unweighted(self):
        """Test that a weighted pair wins when the unweighted one scores zero"""
        grid = CostGrid([(1.0, 1.0), (1.0, 0.1)])
        model = calibrate_cost_sensitive(self.train, grid, folds=self.folds)
        self.assertEqual(model.models[0].t, 0.1)
        self.assertGreater(model.diagnostics[0]["cv_f1"], 0.0)

    def test_refold_policy_runs(self):
        """Test per-pair refolding on a small grid"""
        grid = CostGrid([(1.0, 1.0), (100.0, 1.0)], fold_policy=REFOLD_PER_PAIR)
        model = calibrate_cost_sensitive(self.train, grid, folds=self.folds)
        self.assertEqual(model.strategy_tag, "cost-sensitive")
        self.assertEqual(model.models[0].C, 100.0)

    def test_unit_pair_equals_basic(self):
        """Test that the single pair (1, 1) reproduces basic training"""
        rng = np.random.default_rng(2)
        X = sp.csr_matrix(rng.normal(size=(30, 3)))
        labels = [[j for j in range(3) if rng.random() < 0.4] for _ in range(30)]
        train = SparseDataset(X, labels, n_labels=3)
        folds = FoldPlan(seed=0, k=3, assignment=[i % 3 for i in range(30)])
        calibrated = calibrate_cost_sensitive(train, CostGrid([(1.0, 1.0)]), folds=folds)
        basic = train_ovr_basic(train, C=1.0)
        for a, b in zip(calibrated.models, basic.models):
            np.testing.assert_allclose(a.w, b.w)
            self.assertEqual(a.bias, b.bias)

    def test_report(self):
        """Test the per-label audit lines"""
        model = calibrate_thresholding(self.train, C=1.0, outer_folds=self.folds)
        lines = calibration_report(model).splitlines()
        self.assertTrue(lines[0].startswith("# calibration strategy=thresholding seed=0"))
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[1].startswith("label 0 C 1.0 t 1.0 delta "))
        self.assertIn(" fbr ", lines[1])
        self.assertIn(" fold_deltas ", lines[1])


def noisy_fold_dataset():
    """
    Five folds of ten instances. Folds 1-4 hold two positives at x=1 and eight
    negatives at x=0; fold 0 hides its two positives at x=0 next to one
    negative at x=1, so its best sweep F1 is 1/3.
    """
    rows, labels, assignment = [], [], []
    for fold in range(5):
        if fold == 0:
            members = [(0.0, True)] * 2 + [(0.0, False)] * 7 + [(1.0, False)]
        else:
            members = [(1.0, True)] * 2 + [(0.0, False)] * 8
        for x, positive in members:
            rows.append([x])
            labels.append([0] if positive else [])
            assignment.append(fold)
    data = SparseDataset(sp.csr_matrix(np.array(rows)), labels, n_labels=1)
    return data, FoldPlan(seed=0, k=5, assignment=assignment)


# Test class for the fbr floor of thresholding
class TestFbrFloor(unittest.TestCase):
    def setUp(self):
        self.train, self.folds = noisy_fold_dataset()
        fit, val = fold_views(self.train, self.folds)[0]
        model = train_binary(BinaryProblem(fit, 0), C=1.0)
        self.fold0_values = decision_values(model, val.features)

    def test_floor_rejects_weak_fold(self):
        """Test that a fold below fbr cuts just above its largest value"""
        model = calibrate_thresholding(self.train, C=1.0, fbr_candidates=[0.5], outer_folds=self.folds)
        details = model.diagnostics[0]
        self.assertEqual(details["fbr"], 0.5)
        self.assertAlmostEqual(details["fold_f1"][0], 1.0 / 3.0)
        self.assertEqual(details["fold_f1"][1:], [1.0] * 4)

        deltas = details["fold_deltas"]
        self.assertEqual(len(deltas), 5)
        self.assertAlmostEqual(deltas[0], -np.nextafter(self.fold0_values.max(), np.inf), places=9)
        self.assertAlmostEqual(model.models[0].delta, float(np.mean(deltas)))

    def test_zero_floor_keeps_sweep(self):
        """Test that fbr 0 keeps the weak fold's own cut below its minimum"""
        model = calibrate_thresholding(self.train, C=1.0, fbr_candidates=[0.0], outer_folds=self.folds)
        deltas = model.diagnostics[0]["fold_deltas"]
        self.assertAlmostEqual(deltas[0], 1.0 - self.fold0_values.min(), places=9)
        self.assertAlmostEqual(model.models[0].delta, float(np.mean(deltas)))


# Test class for held-out Macro-F1 of every calibrated method
class TestHeldOutMacroF1(unittest.TestCase):
    def setUp(self):
        self.train = imbalanced_dataset()
        self.folds = FoldPlan(seed=0, k=5, assignment=[i % 5 for i in range(50)])
        X = np.array([[0.2]] * 3 + [[0.0]] * 7)
        self.test = SparseDataset(sp.csr_matrix(X), [[0]] * 3 + [[]] * 7, n_labels=1)

    def macro(self, model):
        pred = predict_basic(decision_matrix(model, self.test))
        return evaluate(self.test.label_sets, pred, n_labels=1).macro_f1

    def test_basic_scores_zero(self):
        """Test that unweighted training misses every held-out positive"""
        self.assertEqual(self.macro(train_ovr_basic(self.train, C=1.0)), 0.0)

    def test_thresholding_scores_one(self):
        """Test the shifted model on held-out data"""
        self.assertEqual(self.macro(calibrate_thresholding(self.train, C=1.0, outer_folds=self.folds)), 1.0)

    def test_dense_cost_grid_scores_one(self):
        """Test the 210-pair grid with per-pair refolding"""
        model = calibrate_cost_sensitive(self.train, build_cost_grid("dense"), folds=self.folds)
        self.assertEqual(model.strategy_tag, "cost-sensitive")
        self.assertEqual(model.diagnostics[0]["cv_f1"], 1.0)
        self.assertEqual(self.macro(model), 1.0)

    def test_simple_cost_grid_scores_one(self):
        """Test the 35-pair grid on shared folds"""
        model = calibrate_cost_sensitive(self.train, build_cost_grid("simple"), folds=self.folds)
        self.assertEqual(self.macro(model), 1.0)


if __name__ == "__main__":
    unittest.main()
