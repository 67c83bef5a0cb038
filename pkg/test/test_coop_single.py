"""
Tests for the single cooperative node rule.
"""

import math
import unittest

import numpy as np
from pydantic import ValidationError

from sensing.coop_single import (
    NodeStats,
    coop_risk,
    coop_thresholds,
    correlation,
    estimate_node_stats,
    min_error_rule,
    psi,
    single_coop_rule,
)
from sensing.errors import DegenerateStats
from sensing.indicators import IndicatorStats, RuleKind, inference_rule


class TestNodeStats(unittest.TestCase):

    def test_bounds(self):
        with self.assertRaises(ValidationError):
            NodeStats(beta=1.5, gamma=0.2)

    def test_uninformative(self):
        self.assertTrue(NodeStats(beta=0.8, gamma=0.2).is_uninformative)
        self.assertFalse(NodeStats(beta=0.8, gamma=0.8).is_uninformative)

    def test_estimate_node_stats(self):
        node = estimate_node_stats([1, 1, 0, 0], [1, 0, 0, 0])
        self.assertAlmostEqual(node.beta, 0.5)
        self.assertAlmostEqual(node.gamma, 0.75)

    def test_estimate_rejects_mismatched_histories(self):
        with self.assertRaises(ValueError):
            estimate_node_stats([1, 0], [1])


class TestCorrelation(unittest.TestCase):

    def test_value(self):
        node = NodeStats(beta=0.75, gamma=0.75)
        expected = math.sqrt(0.21) * 0.5 / math.sqrt(0.4 * 0.6)
        self.assertAlmostEqual(correlation(0.3, node), expected, places=12)

    def test_sign_follows_beta_plus_gamma(self):
        self.assertGreater(correlation(0.5, NodeStats(beta=0.9, gamma=0.8)), 0.0)
        self.assertLess(correlation(0.5, NodeStats(beta=0.2, gamma=0.3)), 0.0)
        self.assertAlmostEqual(correlation(0.5, NodeStats(beta=0.6, gamma=0.4)), 0.0)

    def test_degenerate_alpha(self):
        with self.assertRaises(DegenerateStats):
            correlation(0.0, NodeStats(beta=0.9, gamma=0.9))
        with self.assertRaises(DegenerateStats):
            correlation(1.0, NodeStats(beta=0.9, gamma=0.9))

    def test_concave_for_positive_correlation(self):
        rng = np.random.default_rng(3)
        h = 1e-3
        alphas = np.arange(2, 999) * h
        checked = 0
        while checked < 100:
            beta, gamma = rng.uniform(0.01, 0.99, size=2)
            if beta + gamma <= 1.0:
                continue
            node = NodeStats(beta=float(beta), gamma=float(gamma))
            rho = np.array([correlation(float(a), node) for a in np.concatenate([[alphas[0] - h], alphas, [alphas[-1] + h]])])
            second = rho[2:] - 2.0 * rho[1:-1] + rho[:-2]
            self.assertLessEqual(second.max(), 1e-9, msg=f"beta={beta}, gamma={gamma}")
            checked += 1


class TestSingleCoopRule(unittest.TestCase):

    def test_thresholds(self):
        alpha1, alpha2 = coop_thresholds(9.0, NodeStats(beta=0.9, gamma=0.8))
        self.assertAlmostEqual(alpha1, 7.2 / 7.3)
        self.assertAlmostEqual(alpha2, 1.8 / 2.7)

    def test_zero_over_zero_threshold(self):
        alpha1, _ = coop_thresholds(9.0, NodeStats(beta=1.0, gamma=0.0))
        self.assertEqual(alpha1, 0.0)

    def test_four_cases(self):
        node = NodeStats(beta=0.9, gamma=0.8)
        w = 9.0
        self.assertIs(single_coop_rule(IndicatorStats(alpha=0.99, w=w), node).rule_kind, RuleKind.PASS_TX)
        self.assertIs(single_coop_rule(IndicatorStats(alpha=0.8, w=w), node).rule_kind, RuleKind.TX_AND_CO)
        self.assertIs(single_coop_rule(IndicatorStats(alpha=0.5, w=w), node).rule_kind, RuleKind.ALWAYS0)
        negative = NodeStats(beta=0.2, gamma=0.1)
        self.assertIs(single_coop_rule(IndicatorStats(alpha=0.85, w=w), negative).rule_kind, RuleKind.TX_AND_NOT_CO)

    def test_uninformative_node_matches_inference(self):
        node = NodeStats(beta=0.8, gamma=0.2)
        for i in range(101):
            stats = IndicatorStats(alpha=i / 100, w=9.0)
            self.assertAlmostEqual(coop_risk(stats, node), inference_rule(stats).risk, places=12)

    def test_cooperation_never_hurts(self):
        node = NodeStats(beta=0.9, gamma=0.9)
        for i in range(101):
            stats = IndicatorStats(alpha=i / 100, w=9.0)
            self.assertLessEqual(coop_risk(stats, node), inference_rule(stats).risk + 1e-12)

    def test_min_error_rule_matches_bayes_rule_at_unit_weight(self):
        grid = np.round(np.arange(1, 20) * 0.05, 10)
        compared = 0
        for beta in grid:
            for gamma in grid:
                node = NodeStats(beta=float(beta), gamma=float(gamma))
                alpha1, alpha2 = coop_thresholds(1.0, node)
                for alpha in grid:
                    alpha = float(alpha)
                    rho = correlation(alpha, node)
                    if min(abs(alpha - alpha1), abs(alpha - alpha2), abs(abs(rho) - psi(node))) < 1e-9:
                        continue
                    bayes = single_coop_rule(IndicatorStats(alpha=alpha, w=1.0), node).rule_kind
                    self.assertIs(min_error_rule(alpha, node).rule_kind, bayes, msg=f"{beta}, {gamma}, {alpha}")
                    compared += 1
        self.assertGreater(compared, 5000)


if __name__ == '__main__':
    unittest.main()
