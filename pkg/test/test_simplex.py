"""
Tests for the dense simplex solver against scipy's HiGHS backend.
"""

import unittest

import numpy as np
from scipy.optimize import linprog

from sensing.errors import Infeasible, Unbounded
from utils.simplex import lp_solve


class TestLpSolve(unittest.TestCase):

    def test_random_programs_match_highs(self):
        rng = np.random.default_rng(21)
        solved = 0
        for trial in range(100):
            n = int(rng.integers(2, 8))
            m = int(rng.integers(1, 6))
            c = rng.normal(size=n)
            A_ub = rng.uniform(0.0, 1.0, size=(m, n))
            b_ub = rng.uniform(0.5, 2.0, size=m)
            A_eq = b_eq = None
            if trial % 2:
                A_eq = np.ones((1, n))
                b_eq = [1.0]
            bounds = (0.0, 5.0)
            reference = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
            if reference.status == 2:
                with self.assertRaises(Infeasible, msg=f"trial {trial}"):
                    lp_solve(c, A_eq=A_eq, b_eq=b_eq, bounds=bounds, A_ub=A_ub, b_ub=b_ub)
                continue
            self.assertEqual(reference.status, 0)
            ours = lp_solve(c, A_eq=A_eq, b_eq=b_eq, bounds=bounds, A_ub=A_ub, b_ub=b_ub)
            solved += 1
            self.assertAlmostEqual(ours.fun, reference.fun, places=7)
            self.assertTrue(np.all(A_ub @ ours.x <= b_ub + 1e-9))
            self.assertTrue(np.all(ours.x >= -1e-9) and np.all(ours.x <= 5.0 + 1e-9))
            self.assertTrue(np.all(ours.reduced_costs >= -1e-9))
        self.assertGreater(solved, 50)

    def test_degenerate_program_terminates(self):
        # classic cycling example for the textbook pivoting rule
        c = [-0.75, 20.0, -0.5, 6.0]
        A_ub = np.array([
            [0.25, -8.0, -1.0, 9.0],
            [0.5, -12.0, -0.5, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        result = lp_solve(c, A_ub=A_ub, b_ub=[0.0, 0.0, 1.0])
        self.assertAlmostEqual(result.fun, -1.25)
        np.testing.assert_allclose(result.x, [1.0, 0.0, 1.0, 0.0], atol=1e-9)

    def test_redundant_equalities(self):
        result = lp_solve([1.0, 0.0], A_eq=np.array([[1.0, 1.0], [2.0, 2.0]]), b_eq=[1.0, 2.0])
        np.testing.assert_allclose(result.x, [0.0, 1.0], atol=1e-12)

    def test_free_and_upper_bounded_variables(self):
        result = lp_solve([1.0], A_ub=np.array([[-1.0]]), b_ub=[3.0], bounds=[(None, None)])
        self.assertAlmostEqual(result.fun, -3.0)
        result = lp_solve([-1.0], bounds=[(None, 2.0)], A_ub=np.array([[-1.0]]), b_ub=[10.0])
        self.assertAlmostEqual(result.x[0], 2.0)

    def test_infeasible(self):
        with self.assertRaises(Infeasible):
            lp_solve([1.0, 1.0], A_eq=np.array([[1.0, 1.0]]), b_eq=[-1.0])

    def test_unbounded(self):
        with self.assertRaises(Unbounded):
            lp_solve([-1.0, 0.0], A_ub=np.array([[1.0, -1.0]]), b_ub=[1.0])

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            lp_solve([1.0, 1.0], A_eq=np.array([[1.0, 1.0, 1.0]]), b_eq=[1.0])


if __name__ == '__main__':
    unittest.main()
