"""
Tests for link geometry, neighborhoods, connectivity and node placement.
"""

import math
import unittest

import numpy as np

from pipeline.experiments.neighborhoods import fused_table
from sensing.errors import DegenerateStats
from sensing.fusion import optimal_rule
from sensing.geo import (
    AngularMask,
    CognitiveRadio,
    LinkTables,
    PowerModel,
    RuleConfig,
    Scene,
    alpha_from_geometry,
    beta_gamma_from_geometry,
    connectivity,
    coverage_radius,
    decision_table,
    effective_lognormal,
    evaluate_link,
    link_tables,
    neighborhood,
    select_cooperative_node,
    shadowing_at,
    simulate_link,
    to_polar,
)
from sensing.indicators import IndicatorStats
from sensing.pmf_algebra import JointPmf

COARSE = RuleConfig(radial_cells=60, angular_cells=72)


def rate_and_error(hits: np.ndarray) -> tuple:
    mean = float(hits.mean())
    return mean, math.sqrt(max(mean * (1.0 - mean), 1e-12) / hits.size)


def within_binomial_error(hits: np.ndarray, expected: float) -> bool:
    """Empirical rate within three standard errors of expected, plus one count for discreteness."""
    n = hits.size
    return abs(float(hits.mean()) - expected) <= 3.0 * math.sqrt(expected * (1.0 - expected) / n) + 1.0 / n


def declared_success(table: np.ndarray, tables) -> float:
    """Pr(1^link=1 | declared 1) of a decision table, read off the joint masses."""
    declared = float(np.dot(table, tables.joint1 + tables.joint0))
    return float(np.dot(table, tables.joint1)) / declared if declared > 0.0 else math.nan


class TestPowerModel(unittest.TestCase):

    def setUp(self):
        self.model = PowerModel()

    def test_effective_lognormal_branches(self):
        sigma_s = math.sqrt(8.0)
        self.assertEqual(effective_lognormal(-10.0, self.model), (0.0, 1.0))
        self.assertEqual(effective_lognormal(10.0, self.model), (10.0, 8.0))
        mean, var = effective_lognormal(0.0, self.model)
        self.assertAlmostEqual(mean, sigma_s / 2.0)
        self.assertAlmostEqual(var, 10.0 / 3.0)
        mean, var = effective_lognormal(4.0, self.model)
        self.assertAlmostEqual(mean, 4.0)
        self.assertAlmostEqual(var, 7.0 / (3.0 * sigma_s) * 4.0 + 10.0 / 3.0)

    def test_effective_lognormal_is_continuous(self):
        sigma_s = math.sqrt(8.0)
        for edge in (-sigma_s, sigma_s, 2.0 * sigma_s):
            below = effective_lognormal(edge - 1e-9, self.model)
            above = effective_lognormal(edge + 1e-9, self.model)
            np.testing.assert_allclose(below, above, atol=1e-6)

    def test_no_ps_is_noise_only(self):
        mean, var = effective_lognormal(np.array([-np.inf]), self.model)
        self.assertEqual((mean[0], var[0]), (0.0, 1.0))

    def test_signal_must_dominate_noise(self):
        with self.assertRaises(ValueError):
            PowerModel(sigmaS_sq=0.5)

    def test_coverage_radius(self):
        self.assertAlmostEqual(coverage_radius(self.model, 9.0), 1.141, places=3)


class TestShadowing(unittest.TestCase):

    def test_linear_falloff(self):
        scene = Scene(ps_position=(1.7, 0.0), b_tx=25.0, kappa=0.3)
        self.assertAlmostEqual(shadowing_at((0.0, 0.0), scene), 25.0)
        self.assertAlmostEqual(shadowing_at((0.3, 1.0), scene), 12.5)
        self.assertEqual(shadowing_at((0.8, 0.0), scene), 0.0)

    def test_no_shadow_past_the_ps(self):
        scene = Scene(ps_position=(1.0, 0.0), b_tx=25.0, kappa=10.0)
        self.assertEqual(shadowing_at((1.5, 0.0), scene), 0.0)
        self.assertAlmostEqual(shadowing_at((1.5, math.pi), scene), 25.0 * (1.0 - 1.5 / 20.0))

    def test_polar_angle_is_relative_to_ps(self):
        scene = Scene(ps_position=(0.0, 2.0))
        r, theta = to_polar((0.0, 1.0), scene)
        self.assertAlmostEqual(r, 1.0)
        self.assertAlmostEqual(theta, 0.0)
        self.assertAlmostEqual(to_polar((1.0, 0.0), scene)[1], -math.pi / 2)


class TestLinkProbabilities(unittest.TestCase):

    def setUp(self):
        self.model = PowerModel()
        self.scene = Scene(ps_position=(1.7, 0.0))

    def test_unidirectional_link(self):
        forward = alpha_from_geometry((1.0, 0.0), self.scene, self.model)
        self.assertAlmostEqual(forward, 0.754, places=3)
        reverse_scene = self.scene.model_copy(update={"tx_position": (1.0, 0.0)})
        reverse = alpha_from_geometry(to_polar((0.0, 0.0), reverse_scene), reverse_scene, self.model)
        self.assertAlmostEqual(reverse, 0.9986, places=3)

    def test_tables_agree_with_alpha(self):
        tables = link_tables((0.6, 0.4), self.scene, self.model, co_positions=[(0.4, 0.3), (0.0, 0.6)])
        self.assertAlmostEqual(tables.alpha, alpha_from_geometry((0.6, 0.4), self.scene, self.model), places=12)
        self.assertEqual(tables.joint1.shape, (4,))
        self.assertAlmostEqual(tables.p1.sum(), 1.0)

    def test_alpha_matches_simulation(self):
        rng = np.random.default_rng(17)
        scene = Scene(ps_position=(1.0, 0.0))
        for _ in range(50):
            rx = (float(rng.uniform(0.1, 1.5)), float(rng.uniform(-math.pi, math.pi)))
            outcomes = simulate_link(rx, scene, self.model, [1], 100_000, rng)
            tx = outcomes[:, 0] == 1
            self.assertTrue(within_binomial_error(outcomes[tx, 1], alpha_from_geometry(rx, scene, self.model)), f"rx={rx}")

    def test_node_statistics_match_simulation(self):
        rng = np.random.default_rng(23)
        node = (0.4, 0.3)
        scene = self.scene.model_copy(update={"nodes": [node]})
        for rx in [(1.0, 0.0), (0.5, -0.5), (0.9, 2.5)]:
            stats = beta_gamma_from_geometry(to_polar(node, scene), rx, scene, self.model)
            outcomes = simulate_link(rx, scene, self.model, [0, 1], 200000, rng).astype(bool)
            linked = outcomes[:, 1]
            blocked = outcomes[:, 0] & ~outcomes[:, 1]
            self.assertTrue(within_binomial_error(outcomes[linked, 2], stats.beta), f"rx={rx}")
            self.assertTrue(within_binomial_error(~outcomes[blocked, 2], stats.gamma), f"rx={rx}")

    def test_deterministic_receiver(self):
        with self.assertRaises(DegenerateStats):
            beta_gamma_from_geometry((0.5, 0.0), (1e-6, 0.0), Scene(), self.model)


class TestDecisionTable(unittest.TestCase):

    def setUp(self):
        self.model = PowerModel()
        self.scene = Scene(ps_position=(1.7, 0.0), nodes=[(0.4, 0.3)])

    def test_matches_optimal_rule(self):
        for rx in [(1.0, 0.0), (0.6, 2.0), (1.3, -1.0)]:
            tables = link_tables(rx, self.scene, self.model)
            stats = IndicatorStats(alpha=tables.alpha, w=9.0)
            rule = optimal_rule(stats, JointPmf(s=1, k=1, values=tables.p1), JointPmf(s=0, k=1, values=tables.p0))
            np.testing.assert_array_equal(decision_table(tables, 9.0), rule.gamma_table)

    def test_receiver_next_to_transmitter(self):
        for r in (0.01, 0.05, 0.1):
            tables = link_tables((r, 0.0), self.scene, self.model)
            self.assertEqual(float(tables.joint0.sum()), 0.0)
            np.testing.assert_array_equal(decision_table(tables, 9.0), [1, 1])
            np.testing.assert_array_equal(fused_table(self.scene, self.model, (r, 0.0), 9.0), [1, 1])
            _, _, admissible = evaluate_link((r, 0.0), self.scene, self.model, 9.0)
            self.assertTrue(admissible)

    def test_degenerate_conditionals(self):
        busy_never = LinkTables(joint1=np.array([0.3, 0.5]), joint0=np.zeros(2))
        np.testing.assert_array_equal(busy_never.p0, [0.0, 0.0])
        np.testing.assert_array_equal(decision_table(busy_never, 9.0), [1, 1])
        free_never = LinkTables(joint1=np.zeros(2), joint0=np.array([0.3, 0.5]))
        np.testing.assert_array_equal(decision_table(free_never, 9.0), [0, 0])

    def test_without_cooperative_nodes(self):
        scene = Scene(ps_position=(1.7, 0.0))
        for rx in [(0.3, 0.0), (0.8, 1.0), (1.0, 0.0)]:
            tables = link_tables(rx, scene, self.model)
            np.testing.assert_array_equal(decision_table(tables, 9.0), [int(tables.alpha >= 0.9)])
        np.testing.assert_array_equal(decision_table(link_tables((1.0, 0.0), scene, self.model), 9.0), [0])


class TestNeighborhood(unittest.TestCase):

    def setUp(self):
        self.model = PowerModel()

    def test_no_ps_matches_coverage_disc(self):
        result = neighborhood(Scene(), self.model)
        self.assertAlmostEqual(result.ratio, 1.0, places=12)
        step = result.radii[1] - result.radii[0]
        np.testing.assert_array_less(np.abs(result.boundary() - result.coverage_radius), step)
        self.assertTrue(np.all(result.admissible == result.admissible[:, :1]))
        self.assertTrue(np.all(np.diff(result.alpha[:, 0]) <= 0.0))
        self.assertGreater(result.alpha[0, 0], result.alpha[-1, 0])

    def test_symmetric_about_ps_direction(self):
        scene = Scene(ps_position=(1.7, 0.0), nodes=[(0.5, 0.0)])
        result = neighborhood(scene, self.model, COARSE)
        np.testing.assert_allclose(result.alpha, result.alpha[:, ::-1], atol=1e-12)
        np.testing.assert_allclose(result.alpha_c, result.alpha_c[:, ::-1], atol=1e-12)
        self.assertIsNotNone(result.beta)

    def test_ps_shrinks_neighborhood(self):
        free = neighborhood(Scene(), self.model, COARSE)
        near = neighborhood(Scene(ps_position=(1.7, 0.0)), self.model, COARSE)
        self.assertLess(near.area, free.area)
        toward, away = near.half_plane_areas()
        self.assertAlmostEqual(toward + away, near.area)
        self.assertLess(toward, away)

    def test_cooperation_restores_link(self):
        scene = Scene(ps_position=(1.7, 0.0))
        _, _, alone = evaluate_link((1.0, 0.0), scene, self.model, 9.0)
        self.assertFalse(alone)
        helped = scene.model_copy(update={"nodes": [(0.4, 0.3)]})
        _, _, together = evaluate_link((1.0, 0.0), helped, self.model, 9.0)
        self.assertTrue(together)

    def test_mask_restricts_area(self):
        scene = Scene(ps_position=(1.7, 0.0), nodes=[(0.4, 0.3)])
        mask = AngularMask(center=math.pi, epsilon=math.pi / 4)
        full = neighborhood(scene, self.model, COARSE)
        masked = neighborhood(scene, self.model, COARSE.model_copy(update={"mask": mask}))
        self.assertAlmostEqual(masked.area, full.masked_area(mask), places=12)
        self.assertLess(masked.area, full.area)

    def test_shadowing_needs_a_shadowed_transmitter(self):
        maps = [neighborhood(Scene(ps_position=(0.7, 0.0), kappa=k), self.model, COARSE) for k in (0.3, 0.7)]
        np.testing.assert_array_equal(maps[0].admissible, maps[1].admissible)

    def test_fused_decisions_meet_outage_target(self):
        rng = np.random.default_rng(29)
        scene = Scene(ps_position=(1.7, 0.0), nodes=[(0.4, 0.3)])
        result = neighborhood(scene, self.model, COARSE)
        cells = np.argwhere(result.admissible)
        picks = cells[rng.choice(len(cells), size=20, replace=False)]
        checked = 0
        for i, j in picks:
            rx = (float(result.radii[i]), float(result.angles[j]))
            tables = link_tables(rx, scene, self.model)
            table = decision_table(tables, 9.0)
            analytic = declared_success(table, tables)
            if math.isnan(analytic):
                continue
            self.assertGreaterEqual(analytic, 0.9 - 1e-12)
            outcomes = simulate_link(rx, scene, self.model, table, 100_000, rng)
            declared = outcomes[:, 2] == 1
            if declared.sum() < 100:
                continue
            success, error = rate_and_error(outcomes[declared, 1])
            self.assertGreaterEqual(success, 0.9 - 3.0 * error - 1.0 / declared.sum(), f"rx={rx}")
            checked += 1
        self.assertGreater(checked, 10)

    def test_neighborhood_far_from_ps_is_nearly_free(self):
        alone = Scene(ps_position=(0.7, 0.0))
        for scene in (alone, alone.model_copy(update={"nodes": [(0.4, 0.3)]})):
            self.assertGreaterEqual(neighborhood(scene, self.model).ratio, 0.95)

    def test_larger_obstacle_enlarges_neighborhood(self):
        areas = [
            neighborhood(Scene(ps_position=(0.7, 0.0), b_tx=25.0, kappa=k), self.model, COARSE).area
            for k in (0.3, 0.7)
        ]
        self.assertLess(areas[0], areas[1])

    def test_cooperation_enlarges_neighborhood(self):
        scene = Scene(ps_position=(1.7, 0.0))
        alone = neighborhood(scene, self.model, COARSE)
        helped = neighborhood(scene.model_copy(update={"nodes": [(0.4, 0.3)]}), self.model, COARSE)
        self.assertGreater(helped.area, alone.area)
        self.assertTrue(np.all(helped.admissible[alone.admissible]))


class TestConnectivity(unittest.TestCase):

    def setUp(self):
        self.model = PowerModel(ps_idle_prob=0.7)
        self.scene = Scene(ps_position=(1.7, 0.0), kappa=0.3)
        self.radios = [
            CognitiveRadio(name="CR_j", position=(0.0, 0.0), b=25.0),
            CognitiveRadio(name="CR_i", position=(1.0, 0.0), b=0.0),
        ]

    def test_shadowed_transmitter_is_one_way(self):
        graph = connectivity(self.radios, self.scene, self.model)
        self.assertTrue(graph.has_edge("CR_i", "CR_j"))
        self.assertFalse(graph.has_edge("CR_j", "CR_i"))
        self.assertEqual(graph.nodes["CR_j"]["b"], 25.0)

    def test_shadowed_link_alpha(self):
        scene = self.scene.model_copy(update={"b_tx": 25.0})
        self.assertAlmostEqual(alpha_from_geometry((1.0, 0.0), scene, self.model), 0.699, places=3)

    def test_cooperative_node_restores_edge(self):
        scene = self.scene.model_copy(update={"nodes": [(1.2, 0.3)]})
        graph = connectivity(self.radios, scene, self.model)
        self.assertTrue(graph.has_edge("CR_j", "CR_i"))
        self.assertTrue(graph.has_edge("CR_i", "CR_j"))

    def test_needs_two_radios(self):
        with self.assertRaises(ValueError):
            connectivity(self.radios[:1], self.scene, self.model)


class TestPlacement(unittest.TestCase):

    def test_selects_candidate_toward_ps(self):
        scene = Scene(ps_position=(1.7, 0.0))
        candidates = [(0.4, 0.3), (0.0, 0.6), (-0.4, 0.3)]
        self.assertEqual(select_cooperative_node(candidates, scene, PowerModel(), 0.1), 0)

    def test_ties_keep_first_candidate(self):
        scene = Scene(ps_position=(1.7, 0.0))
        self.assertEqual(select_cooperative_node([(0.4, 0.3), (0.4, 0.3)], scene, PowerModel(), 0.1, rule_config=COARSE), 0)

    def test_no_candidates(self):
        with self.assertRaises(ValueError):
            select_cooperative_node([], Scene(), PowerModel(), 0.1)


if __name__ == '__main__':
    unittest.main()
