"""
Tests for subset indexing, incidence and G matrices, and joint/marginal conversion.
"""

import unittest
from math import comb

import numpy as np

from sensing.errors import InvalidPmf, SizeLimit
from sensing.pmf_algebra import (
    JointPmf,
    MarginalSet,
    build_g,
    build_indexer,
    complete_joint,
    empirical_joint,
    incidence_matrix,
    invert_g_bar,
    joint_to_marginals,
    pmf_to_rows,
    product_pmf,
    restrict_pmf,
    rows_to_pmf,
    subset_count,
)


def brute_marginals(p: JointPmf, m: int) -> np.ndarray:
    """Pr(every listed node reads s) by summing matching joint entries."""
    indexer = build_indexer(p.k)
    full = (1 << p.k) - 1
    out = []
    for subset in indexer.masks[:subset_count(m, p.k)]:
        total = 0.0
        for mask, value in zip(indexer.masks, p.values):
            readings_s = mask if p.s == 1 else full ^ mask
            if readings_s & subset == subset:
                total += value
        out.append(total)
    return np.array(out)


class TestSubsetIndexer(unittest.TestCase):

    def test_small_orders(self):
        np.testing.assert_array_equal(build_indexer(1).patterns, [[0], [1]])
        np.testing.assert_array_equal(build_indexer(2).patterns, [[0, 0], [1, 0], [0, 1], [1, 1]])

    def test_size_guard(self):
        with self.assertRaises(SizeLimit):
            build_indexer(17)

    def test_incidence_properties_exhaustive(self):
        for k in range(1, 9):
            indexer = build_indexer(k)
            self.assertEqual(sorted(indexer.masks), list(range(1 << k)))
            for m in range(k + 1):
                block = indexer.patterns[indexer.block(m)]
                self.assertTrue(np.all(block.sum(axis=1) == m))
                self.assertEqual(len({tuple(row) for row in block}), comb(k, m))
            for n in range(k + 1):
                rows = indexer.subsets(n)
                for m in range(k + 1):
                    entries = incidence_matrix(n, m, k).entries
                    columns = indexer.subsets(m)
                    self.assertEqual(entries.shape, (comb(k, n), comb(k, m)))
                    expected = np.array([[int(col & row == row) for col in columns] for row in rows])
                    np.testing.assert_array_equal(entries, expected, err_msg=f"n={n}, m={m}, k={k}")


class TestGMatrix(unittest.TestCase):

    def test_single_node(self):
        np.testing.assert_array_equal(build_g(1, 1, 1).g_bar, [[1, 1], [0, 1]])
        np.testing.assert_array_equal(build_g(0, 1, 1).matrix, [[1, 1], [1, 0]])
        np.testing.assert_array_equal(invert_g_bar(build_g(1, 1, 1)), [[1, -1], [0, 1]])

    def test_order_zero_is_normalization(self):
        for k in range(1, 5):
            np.testing.assert_array_equal(build_g(1, 0, k).matrix, np.ones((1, 1 << k)))

    def test_inverse_is_exact(self):
        for k in range(1, 7):
            for m in range(k + 1):
                for s in (0, 1):
                    g = build_g(s, m, k)
                    product = invert_g_bar(g) @ g.g_bar.astype(np.int64)
                    np.testing.assert_array_equal(product, np.eye(subset_count(m, k), dtype=np.int64))

    def test_column_reversal(self):
        np.testing.assert_array_equal(build_g(0, 2, 4).matrix, build_g(1, 2, 4).matrix[:, ::-1])


class TestConversions(unittest.TestCase):

    def setUp(self):
        self.rng = np.random.default_rng(5)

    def random_pmf(self, s: int, k: int) -> JointPmf:
        return JointPmf(s=s, k=k, values=self.rng.dirichlet(np.ones(1 << k)))

    def test_first_order_marginal(self):
        q = joint_to_marginals(JointPmf(s=1, k=1, values=[0.3, 0.7]), 1)
        np.testing.assert_allclose(q.values, [1.0, 0.7])
        np.testing.assert_allclose(joint_to_marginals(self.random_pmf(0, 3), 0).values, [1.0])

    def test_marginals_match_brute_force(self):
        for k in range(1, 7):
            for s in (0, 1):
                p = self.random_pmf(s, k)
                for m in range(k + 1):
                    np.testing.assert_allclose(joint_to_marginals(p, m).values, brute_marginals(p, m), atol=1e-12)

    def test_independent_marginals(self):
        p = product_pmf(0, [0.75, 0.7])
        np.testing.assert_allclose(joint_to_marginals(p, 1).values, [1.0, 0.75, 0.7])

    def test_complete_single_node(self):
        np.testing.assert_allclose(complete_joint(MarginalSet(s=1, m=0, k=1, values=[1.0]), 0.8).values, [0.2, 0.8])

    def test_complete_correlated_pair(self):
        g1, g2, delta = 0.75, 0.7, 0.05
        p = complete_joint(MarginalSet(s=0, m=1, k=2, values=[1.0, g1, g2]), g1 * g2 + delta)
        expected = [g1 * g2 + delta, g2 - g1 * g2 - delta, g1 - g1 * g2 - delta, 1 - g1 - g2 + g1 * g2 + delta]
        np.testing.assert_allclose(p.values, expected, atol=1e-15)

    def test_roundtrip(self):
        for trial in range(1000):
            k = 1 + trial % 6
            p = self.random_pmf(trial % 2, k)
            back = complete_joint(joint_to_marginals(p, k - 1), p.tail_mass)
            np.testing.assert_allclose(back.values, p.values, atol=1e-12, rtol=0.0)

    def test_infeasible_tail(self):
        with self.assertRaises(InvalidPmf):
            complete_joint(MarginalSet(s=0, m=1, k=2, values=[1.0, 0.75, 0.7]), 0.9)


class TestPmfTypes(unittest.TestCase):

    def test_joint_validation(self):
        with self.assertRaises(InvalidPmf):
            JointPmf(s=1, k=1, values=[0.5, 0.6])
        with self.assertRaises(InvalidPmf):
            JointPmf(s=1, k=1, values=[-0.1, 1.1])
        with self.assertRaises(InvalidPmf):
            JointPmf(s=1, k=2, values=[0.5, 0.5])

    def test_marginal_validation(self):
        with self.assertRaises(InvalidPmf):
            MarginalSet(s=1, m=1, k=2, values=[0.9, 0.5, 0.5])
        q = MarginalSet(s=1, m=2, k=2, values=[1.0, 0.5, 0.4, 0.45])
        with self.assertRaises(InvalidPmf):
            q.check_consistency()

    def test_product_semantics(self):
        p1 = product_pmf(1, [0.9])
        p0 = product_pmf(0, [0.8])
        np.testing.assert_allclose(p1.values, [0.1, 0.9])
        np.testing.assert_allclose(p0.values, [0.8, 0.2])

    def test_restrict_product(self):
        p = product_pmf(1, [0.6, 0.7, 0.8])
        np.testing.assert_allclose(restrict_pmf(p, [2, 0]).values, product_pmf(1, [0.8, 0.6]).values, atol=1e-15)

    def test_empirical_joint(self):
        samples = np.array([[0, 0], [1, 0], [1, 0], [1, 1]])
        np.testing.assert_allclose(empirical_joint(1, samples).values, [0.25, 0.5, 0.0, 0.25])

    def test_rows_codec_accepts_any_order(self):
        values = product_pmf(1, [0.6, 0.7, 0.8]).values
        rows = pmf_to_rows(values, 3)[::-1]
        np.testing.assert_array_equal(rows_to_pmf(rows, 3), values)
        with self.assertRaises(InvalidPmf):
            rows_to_pmf(rows[:-1], 3)


if __name__ == '__main__':
    unittest.main()
