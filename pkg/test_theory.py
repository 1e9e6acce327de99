import unittest

import numpy as np

from src.errors import ValidationError
from src.metrics import confusion, micro_f1, micro_upper_bound
from src.models.dataset import trial_rng
from src.predictor import top_ranked
from src.theory import (
    SyntheticRanking, add_swap_noise, check_theorem1, check_theorem2, check_theorem3, gen_perfect_ranking,
    overestimation_demo, render_text, run_all_checks,
)


# Test class for synthetic rankings
class TestPerfectRanking(unittest.TestCase):
    def test_strict_separation(self):
        """Test that generated rankings separate true from false labels"""
        for seed in range(20):
            ranking = gen_perfect_ranking(seed, 15, 5, 0.4)
            self.assertTrue(ranking.perfect)
            self.assertTrue(ranking.is_perfectly_ranked())
            for labels, row in zip(ranking.truth, ranking.decisions):
                for j in range(5):
                    if j in labels:
                        self.assertGreater(row[j], 0.5)
                    else:
                        self.assertLess(row[j], 0.5)

    def test_open_bands(self):
        """Test that true values stay inside (0.5, 1) and false values inside (0, 0.5)"""
        for seed in range(10):
            ranking = gen_perfect_ranking(seed, 50, 6, 0.4)
            for labels, row in zip(ranking.truth, ranking.decisions):
                for j in range(6):
                    if j in labels:
                        self.assertTrue(0.5 < row[j] < 1.0)
                    else:
                        self.assertTrue(0.0 < row[j] < 0.5)

    def test_single_label_vocabulary(self):
        """Test the degenerate one-label case"""
        ranking = gen_perfect_ranking(1, 10, 1, 0.5)
        self.assertEqual(ranking.decisions.shape, (10, 1))
        self.assertTrue(ranking.is_perfectly_ranked())

    def test_deterministic(self):
        """Test that a seed regenerates the same ranking"""
        a = gen_perfect_ranking(4, 12, 6, 0.3)
        b = gen_perfect_ranking(4, 12, 6, 0.3)
        self.assertEqual(a.truth, b.truth)
        np.testing.assert_array_equal(a.decisions, b.decisions)

    def test_density_range(self):
        """Test that the density must lie strictly inside (0, 1)"""
        with self.assertRaises(ValidationError):
            gen_perfect_ranking(0, 5, 3, 1.0)

    def test_detects_bad_ranking(self):
        """Test that a swapped row is flagged"""
        ranking = SyntheticRanking([[0]], [[0.2, 0.8]], perfect=False)
        self.assertFalse(ranking.is_perfectly_ranked())

    def test_swap_noise(self):
        """Test that zero noise keeps the ranking and full noise breaks it"""
        ranking = gen_perfect_ranking(2, 30, 4, 0.5)
        self.assertTrue(add_swap_noise(ranking, 0.0, trial_rng(2, 1)).is_perfectly_ranked())
        noisy = add_swap_noise(ranking, 1.0, trial_rng(2, 1))
        self.assertFalse(noisy.perfect)
        self.assertFalse(noisy.is_perfectly_ranked())

    def test_true_counts_reach_one(self):
        """Test Micro-F1 = bound = 1 when K_hat equals K on a perfect ranking"""
        ranking = gen_perfect_ranking(5, 20, 6, 0.3)
        pred = top_ranked(ranking.decisions, ranking.true_counts())
        self.assertEqual(micro_f1(confusion(ranking.truth, pred, n_labels=6)), 1.0)
        self.assertEqual(micro_upper_bound(ranking.true_counts(), ranking.true_counts()), 1.0)

    def test_empty_predictions_meet_bound(self):
        """Test that K_hat = 0 gives 0 = bound"""
        ranking = gen_perfect_ranking(6, 10, 4, 0.5)
        pred = top_ranked(ranking.decisions, np.zeros(10, dtype=int))
        self.assertEqual(micro_f1(confusion(ranking.truth, pred, n_labels=4)), 0.0)
        self.assertEqual(micro_upper_bound(ranking.true_counts(), np.zeros(10, dtype=int)), 0.0)


# Test class for the theorem checkers
class TestTheoremChecks(unittest.TestCase):
    def test_bound_never_violated(self):
        """Test 1000 random trials of the Micro-F1 bound"""
        report = check_theorem1(0, 1000)
        self.assertTrue(report.passed)
        self.assertEqual(report.violations, 0)
        self.assertGreaterEqual(report.min_slack, -1e-12)
        self.assertIsNone(report.counterexample)

    def test_top_ranked_attains_bound(self):
        """Test 1000 perfect rankings with random K_hat"""
        report = check_theorem2(0, 1000)
        self.assertTrue(report.passed)
        self.assertEqual(report.equality_count, 1000)
        self.assertGreater(report.brute_force_instances, 0)

    def test_accuracy_equals_micro(self):
        """Test 1000 single-label trials"""
        report = check_theorem3(0, 1000)
        self.assertTrue(report.passed)
        self.assertEqual(report.max_slack, 0.0)
        self.assertEqual(report.min_slack, 0.0)

    def test_parallel_matches_serial(self):
        """Test that worker threads do not change the report"""
        self.assertEqual(check_theorem1(3, 50, n_jobs=1).to_dict(), check_theorem1(3, 50, n_jobs=4).to_dict())

    def test_trials_must_be_positive(self):
        """Test the trial count precondition"""
        with self.assertRaises(ValidationError):
            check_theorem1(0, 0)


# Test class for the over-estimation demo
class TestOverestimation(unittest.TestCase):
    def test_zero_noise_gap(self):
        """Test that the unrealistic rule is perfect and ahead without noise"""
        report = overestimation_demo(0)
        first = report.rows[0]
        self.assertEqual(first["noise"], 0.0)
        self.assertEqual(first["unrealistic"], 1.0)
        self.assertLess(first["basic"], 1.0)
        self.assertGreater(first["gap"], 0.0)
        self.assertEqual(len(report.rows), 4)

    def test_gap_positive_across_seeds(self):
        """Test that the unrealistic rule beats the sign rule at zero noise"""
        for seed in range(5):
            row = overestimation_demo(seed).rows[0]
            self.assertEqual(row["unrealistic"], 1.0)
            self.assertGreater(row["gap"], 0.0, msg=f"seed {seed}")
            self.assertAlmostEqual(row["gap"], row["unrealistic"] - row["basic"])

    def test_deterministic(self):
        """Test that a seed reproduces the report"""
        self.assertEqual(overestimation_demo(1).to_dict(), overestimation_demo(1).to_dict())

    def test_render(self):
        """Test the text summary of a full run"""
        results = run_all_checks(0, 20)
        self.assertTrue(results["passed"])
        self.assertGreater(results["overestimation_gap"], 0.0)
        text = render_text(results)
        self.assertTrue(text.startswith("# verify seed=0 trials=20"))
        self.assertTrue(text.rstrip().endswith("PASS"))
        self.assertIn("theorem2", text)


if __name__ == "__main__":
    unittest.main()
