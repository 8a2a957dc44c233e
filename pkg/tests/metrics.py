import unittest
from functools import lru_cache

import numpy as np

from src.lib.core import ExitPath, HybridTrace
from src.lib.errors import ContractViolation, UndefinedRatioError
from src.lib.metrics import (CostRow, bin_costs_by_length, bin_lengths, bin_ratios, edit_distance,
                             normalize_words, share_at_most, step_ratio, word_error_rate)


def levenshtein(a, b) -> int:
    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0 or j == 0:
            return i + j
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
    return d(len(a), len(b))


def trace(verify_passes: int, ar_steps: int, baseline_steps: int) -> HybridTrace:
    return HybridTrace(verify_passes, ar_steps, 0, verify_passes, (), ExitPath.EOS_CONFIRMED, baseline_steps)


class TestEditDistance(unittest.TestCase):
    """Test cases for edit_distance"""

    def test_identical(self):
        """Test identical sequences"""
        stats = edit_distance([1, 2, 3], [1, 2, 3])
        self.assertEqual(stats.errors, 0)
        self.assertEqual(stats.wer, 0.0)

    def test_substitution(self):
        """Test one substitution"""
        stats = edit_distance('abc', 'axc')
        self.assertEqual((stats.substitutions, stats.deletions, stats.insertions), (1, 0, 0))
        self.assertAlmostEqual(stats.wer, 1 / 3)

    def test_mixed(self):
        """Test mixed edits"""
        stats = edit_distance('abcde', 'acdqef')
        self.assertEqual((stats.substitutions, stats.deletions, stats.insertions), (0, 1, 2))
        self.assertAlmostEqual(stats.wer, 0.6)

    def test_empty_reference(self):
        """Test an empty reference"""
        stats = edit_distance([], [1, 2])
        self.assertTrue(stats.empty_reference)
        self.assertEqual(stats.insertions, 2)
        self.assertEqual(stats.wer, 2.0)
        self.assertEqual(edit_distance([], []).wer, 0.0)

    def test_empty_hypothesis(self):
        """Test an empty hypothesis"""
        stats = edit_distance([1, 2, 3], [])
        self.assertEqual(stats.deletions, 3)
        self.assertEqual(stats.wer, 1.0)

    def test_against_recursive_definition(self):
        """Test against the recursive definition on random pairs"""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            a = tuple(rng.integers(0, 4, size=int(rng.integers(0, 13))).tolist())
            b = tuple(rng.integers(0, 4, size=int(rng.integers(0, 13))).tolist())
            stats = edit_distance(a, b)
            with self.subTest(a=a, b=b):
                self.assertEqual(stats.errors, levenshtein(a, b))
                self.assertEqual(stats.insertions - stats.deletions, len(b) - len(a))
                self.assertLessEqual(stats.substitutions + stats.deletions, len(a))

    def test_metric_properties(self):
        """Test symmetry and the triangle inequality"""
        rng = np.random.default_rng(5)
        for _ in range(300):
            a, b, c = (rng.integers(0, 3, size=int(rng.integers(0, 10))).tolist() for _ in range(3))
            ab = edit_distance(a, b).errors
            self.assertEqual(ab, edit_distance(b, a).errors)
            self.assertLessEqual(edit_distance(a, c).errors, ab + edit_distance(b, c).errors)


class TestWordErrorRate(unittest.TestCase):
    """Test cases for word_error_rate"""

    def test_normalization(self):
        """Test word normalization"""
        self.assertEqual(normalize_words("Hello, World! Can't stop."), ['hello', 'world', "can't", 'stop'])
        self.assertEqual(word_error_rate("Hello, World!", "hello world").errors, 0)

    def test_one_wrong_word(self):
        """Test a sentence with one wrong word"""
        stats = word_error_rate("i dunno muttered dick and the men can't be sure",
                                "i dunno muttered dick and our men can't be sure")
        self.assertEqual(stats.substitutions, 1)
        self.assertAlmostEqual(stats.wer, 0.1)


class TestStepRatio(unittest.TestCase):
    """Test step ratios and shares"""

    def test_perfect_draft(self):
        """Test the ratio of a one-pass decode"""
        self.assertAlmostEqual(step_ratio(trace(1, 0, 101)), 1 / 101)

    def test_patched(self):
        """Test the ratio with patches"""
        self.assertAlmostEqual(step_ratio(trace(2, 6, 20)), 0.4)

    def test_zero_baseline(self):
        """Test the error for a zero baseline"""
        with self.assertRaises(UndefinedRatioError):
            step_ratio(trace(1, 0, 0))
        with self.assertRaises(ZeroDivisionError):
            step_ratio(trace(1, 0, 0))

    def test_share_at_most(self):
        """Test the share of ratios under a threshold"""
        self.assertEqual(share_at_most([], 0.3), 0.0)
        self.assertAlmostEqual(share_at_most([0.1, 0.3, 0.5, 0.2], 0.3), 0.75)
        self.assertEqual(share_at_most([0.1 + 0.2], 0.3), 1.0)


class TestHistograms(unittest.TestCase):
    """Test ratio, cost and length binning"""

    def test_ratio_bins(self):
        """Test ratio bins"""
        hist = bin_ratios([0.10, 0.12, 0.49], 5.0)
        self.assertEqual(hist.bins, {2: 2, 9: 1})
        self.assertEqual(hist.rows(), [(10.0, 15.0, 2), (45.0, 50.0, 1)])
        self.assertEqual(hist.total, 3)

    def test_bin_edges(self):
        """Test values on bin edges"""
        self.assertEqual(bin_ratios([0.15, 0.05, 1.0], 5.0).bins, {1: 1, 3: 1, 20: 1})

    def test_empty(self):
        """Test an empty histogram"""
        self.assertEqual(bin_ratios([]).bins, {})

    def test_every_ratio_lands_in_one_bin(self):
        """Test that bins account for every ratio"""
        ratios = np.random.default_rng(1).uniform(0.0, 1.5, size=500).tolist()
        self.assertEqual(bin_ratios(ratios, 2.5).total, 500)

    def test_invalid(self):
        """Test rejection of invalid input"""
        with self.assertRaises(ContractViolation):
            bin_ratios([0.1], 0)
        with self.assertRaises(ContractViolation):
            bin_ratios([-0.1])

    def test_cost_by_length(self):
        """Test mean costs per length bin"""
        binned = bin_costs_by_length([
            CostRow(7, 8.0, 0.0, 2.0),
            CostRow(3, 4.0, 0.0, 4.0),
            CostRow(25, 26.0, 1.0, 5.0),
        ], bin_size=10)
        rows = binned.rows()
        self.assertEqual([(lo, hi, b.n) for lo, hi, b in rows], [(0, 10, 2), (20, 30, 1)])
        self.assertAlmostEqual(rows[0][2].baseline_mean, 6.0)
        self.assertAlmostEqual(rows[0][2].hybrid_mean, 3.0)
        self.assertAlmostEqual(rows[1][2].draft_mean, 1.0)

    def test_lengths(self):
        """Test length bins"""
        hist = bin_lengths([3, 9, 10, 150], 10)
        self.assertEqual(hist.rows(), [(0, 10, 2), (10, 20, 1), (150, 160, 1)])
        self.assertAlmostEqual(hist.share_below(10), 0.5)
        self.assertAlmostEqual(hist.share_below(20), 0.75)
        self.assertEqual(bin_lengths([]).share_below(10), 0.0)


if __name__ == "__main__":
    unittest.main()
